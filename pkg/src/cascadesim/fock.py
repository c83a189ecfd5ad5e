"""Brute-force Lindblad integration on a truncated Fock space.

Used as an oracle for the Gaussian pipeline: the effective Hamiltonian and
jump operators are built as explicit matrices from the same ``(R, L)`` split,
the master equation is integrated with fixed-step RK4, and second moments are
read off the density operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from cascadesim.chain import InteractionChain
from cascadesim.errors import TruncationLeakError
from cascadesim.gaussian import drift_diffusion, evolve, thermal_state
from cascadesim.meq import effective_matrices, jump_operators

MAX_DIMENSION = 4096


@dataclass(frozen=True)
class FockConfig:
    """Per-mode truncation and the tolerated population of the top level.

    ``dt`` is the step for a single-level space; the actual step is
    ``dt / max(dims)`` because the fastest Liouvillian frequencies grow with
    the truncation.
    """

    dims: tuple[int, ...] = (10, 10)
    leak_tol: float = 1e-3
    dt: float = 0.1

    def __post_init__(self):
        dims = (int(self.dims),) if np.isscalar(self.dims) else tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if any(d < 2 for d in dims):
            raise ValueError("FockConfig: every dimension must be >= 2")
        if math.prod(dims) > MAX_DIMENSION:
            raise ValueError(f"FockConfig: total dimension {math.prod(dims)} exceeds {MAX_DIMENSION}")
        if not self.dt > 0:
            raise ValueError("FockConfig: dt must be positive")

    def for_modes(self, n_modes: int) -> "FockConfig":
        if len(self.dims) == n_modes:
            return self
        if len(self.dims) == 1:
            return FockConfig(self.dims * n_modes, self.leak_tol, self.dt)
        raise ValueError(f"dimension mismatch: {len(self.dims)} dims for {n_modes} modes")


def _embed(op, mode, dims):
    out = sp.identity(1, format="csr", dtype=complex)
    for m, d in enumerate(dims):
        out = sp.kron(out, op if m == mode else sp.identity(d, dtype=complex), format="csr")
    return out


def mode_operators(dims) -> tuple[list, list, list]:
    """Annihilators ``b_i`` and quadratures ``X_i, P_i`` on the product space."""
    bs, xs, ps = [], [], []
    for m, d in enumerate(dims):
        a = sp.diags(np.sqrt(np.arange(1, d)), 1, shape=(d, d), dtype=complex, format="csr")
        b = _embed(a, m, dims)
        bs.append(b)
        xs.append((b + b.conj().T) / math.sqrt(2))
        ps.append((b - b.conj().T) / (1j * math.sqrt(2)))
    return bs, xs, ps


def _quadratures(dims):
    _, xs, ps = mode_operators(dims)
    Q = []
    for x, p in zip(xs, ps):
        Q += [x, p]
    return Q


def _dissipator(c, eye):
    """Superoperator of ``D[c]`` for column-stacked ``vec(rho)``."""
    cd = c.conj().T
    cdc = cd @ c
    return (sp.kron(c.conj(), c) - 0.5 * sp.kron(eye, cdc) - 0.5 * sp.kron(cdc.T, eye))


def liouvillian(R: np.ndarray, jumps, systems, dims) -> sp.csr_matrix:
    """Sparse Liouvillian for ``H = 1/2 Q^T R Q + sum Omega_i b_i^dag b_i`` and all dissipators."""
    Q = _quadratures(dims)
    bs, _, _ = mode_operators(dims)
    D = math.prod(dims)
    eye = sp.identity(D, dtype=complex, format="csr")
    H = sp.csr_matrix((D, D), dtype=complex)
    R = np.asarray(R, dtype=complex)
    for i in range(len(Q)):
        for j in range(len(Q)):
            if R[i, j] != 0:
                H = H + 0.5 * R[i, j] * (Q[i] @ Q[j])
    for s, b in zip(systems, bs):
        H = H + s.omega * (b.conj().T @ b)
    H = (H + H.conj().T) / 2
    L = -1j * (sp.kron(eye, H) - sp.kron(H.T, eye))
    for jump in jumps:
        c = sp.csr_matrix((D, D), dtype=complex)
        for coeff, q in zip(jump.operator_vector(), Q):
            if coeff != 0:
                c = c + coeff * q
        L = L + _dissipator(c, eye)
    for s, b in zip(systems, bs):
        if s.gamma > 0:
            L = L + s.gamma * (s.nbar + 1) * _dissipator(b, eye)
            if s.nbar > 0:
                L = L + s.gamma * s.nbar * _dissipator(b.conj().T.tocsr(), eye)
    return L.tocsr()


def lindblad_rhs(rho: np.ndarray, R: np.ndarray, jumps, systems, cfg: FockConfig) -> np.ndarray:
    """``d rho / dt`` for the effective Hamiltonian, jumps and local thermal baths."""
    dims = cfg.for_modes(len(systems)).dims
    D = math.prod(dims)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (D, D):
        raise ValueError(f"dimension mismatch: rho {rho.shape}, Fock space {D}")
    L = liouvillian(R, jumps, systems, dims)
    return (L @ rho.reshape(-1, order="F")).reshape(D, D, order="F")


def thermal_density(nbars, dims) -> np.ndarray:
    """Product of truncated, renormalized thermal states."""
    rho = np.ones((1, 1))
    for nbar, d in zip(nbars, dims):
        if nbar == 0:
            p = np.zeros(d)
            p[0] = 1.0
        else:
            p = (nbar / (nbar + 1)) ** np.arange(d)
        rho = np.kron(rho, np.diag(p / p.sum()))
    return rho.astype(complex)


def covariance(rho: np.ndarray, dims) -> np.ndarray:
    """Symmetrized second moments minus products of means."""
    Q = _quadratures(dims)
    means = np.array([np.trace(q @ rho).real for q in Q])
    n = len(Q)
    C = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            sym = Q[i] @ Q[j] + Q[j] @ Q[i]
            C[i, j] = C[j, i] = 0.5 * np.trace(sym @ rho).real - means[i] * means[j]
    return C


def top_level_population(rho: np.ndarray, dims) -> list[float]:
    """Population of the highest retained Fock level of each mode."""
    p = np.real(np.diag(rho)).reshape(dims)
    out = []
    for m in range(len(dims)):
        axes = tuple(a for a in range(len(dims)) if a != m)
        out.append(float(p.sum(axis=axes)[-1]))
    return out


def _rk4_step(L, y, h):
    k1 = L @ y
    k2 = L @ (y + h / 2 * k1)
    k3 = L @ (y + h / 2 * k2)
    k4 = L @ (y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def oracle_covariance(chain: InteractionChain, cfg: FockConfig, t_grid) -> list[np.ndarray]:
    """Covariance trajectory from the Fock-space master equation.

    Starts from the thermal state of the chain's local baths.  Raises
    :class:`TruncationLeakError` if a top Fock level exceeds ``cfg.leak_tol``.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must start at 0 and be strictly increasing")
    cfg = cfg.for_modes(chain.n_systems)
    dims = cfg.dims
    D = math.prod(dims)
    if chain.n_passes:
        m = effective_matrices(chain)
        R, jumps = m.R, jump_operators(m.L, scale=float(np.linalg.norm(m.At, 2)))
    else:
        R, jumps = np.zeros((2 * chain.n_systems,) * 2), []
    L = liouvillian(R, jumps, chain.systems, dims)
    rho = thermal_density([s.nbar for s in chain.systems], dims)
    y = rho.reshape(-1, order="F")
    h_max = cfg.dt / max(dims)

    def snapshot(vec, time):
        r = vec.reshape(D, D, order="F")
        leak = top_level_population(r, dims)
        if max(leak) > cfg.leak_tol:
            raise TruncationLeakError(
                f"truncation leak at t = {time:.4g}: top-level populations {leak} "
                f"exceed {cfg.leak_tol}; increase dims"
            )
        return covariance(r, dims)

    out = [snapshot(y, 0.0)]
    for t0, delta in zip(t[:-1], np.diff(t)):
        m_steps = max(1, math.ceil(delta / h_max - 1e-9))
        h = delta / m_steps
        for _ in range(m_steps):
            y = _rk4_step(L, y, h)
        out.append(snapshot(y, t0 + delta))
    return out


@dataclass(frozen=True)
class OracleReport:
    max_abs_deviation: float
    passed: bool
    tol: float


def oracle_compare(chain: InteractionChain, cfg: FockConfig, t_grid,
                   tol: float = 1e-3) -> OracleReport:
    """Largest entrywise gap between the oracle and :func:`cascadesim.gaussian.evolve`."""
    oracle = oracle_covariance(chain, cfg, t_grid)
    gauss = evolve(drift_diffusion(chain), thermal_state(chain.systems), t_grid)
    dev = max(float(np.abs(a - b).max()) for a, b in zip(oracle, gauss))
    return OracleReport(dev, dev <= tol, tol)
