"""Effective master equation of a cascaded chain with losses.

The light field is eliminated into a pass-level matrix ``A`` with
``A = sum_jk A_jk B_j^dag B_k``.  Mapping the pass operators onto canonical
quadratures ``Q = (X_1, P_1, X_2, P_2, ...)`` with ``b = (X + iP)/sqrt(2)``
gives ``At = U^dag A U``, which splits into a Hamiltonian part
``H = 1/2 Q^T R Q`` and a dissipator ``Lambda = Q^T L Q``.

Local oscillator frequencies and intrinsic baths are *not* included here;
:mod:`cascadesim.gaussian` adds them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from cascadesim.chain import InteractionChain, pump_rescaled_couplings, transmittance_matrix
from cascadesim.errors import NotPSDError

DEFAULT_PSD_TOL = 1e-10
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class JumpOperator:
    """``j = sqrt(rate) * sum_i conj(coeffs[i]) Q_i``, with ``coeffs`` unit-norm."""

    rate: float
    coeffs: np.ndarray

    def operator_vector(self) -> np.ndarray:
        """Coefficients ``c`` such that ``j = sum_i c_i Q_i``."""
        return math.sqrt(self.rate) * np.conj(self.coeffs)


@dataclass(frozen=True)
class PSDCertificate:
    min_eigenvalue: float
    tol: float


class EffectiveMatrices(NamedTuple):
    A: np.ndarray       # pass-level coupling, n x n
    U: np.ndarray       # pass -> quadrature map, n x 2N
    At: np.ndarray      # U^dag A U, 2N x 2N
    R: np.ndarray       # Hamiltonian matrix
    L: np.ndarray       # dissipation matrix


def build_pass_matrix(chain: InteractionChain) -> np.ndarray:
    """Lower-triangular ``A`` with ``A_jk = eta_jk g_j g_k`` below and ``g_j^2 / 2`` on the diagonal."""
    g = np.asarray(pump_rescaled_couplings(chain), dtype=float)
    T = transmittance_matrix(chain)
    A = np.tril(T * np.outer(g, g), k=-1) + np.diag(g**2 / 2)
    return A.astype(complex)


def quadrature_map(chain: InteractionChain) -> np.ndarray:
    """Rows give ``B_j`` in the quadrature basis.

    ``B_j = e^{i phi_j} [(mu_j + nu_j) X + i (mu_j - nu_j) P] / sqrt(2)``.
    """
    U = np.zeros((chain.n_passes, 2 * chain.n_systems), dtype=complex)
    for j, (p, s) in enumerate(zip(chain.passes, chain.pass_system_indices())):
        phase = np.exp(1j * p.phi)
        U[j, 2 * s] = phase * (p.mu + p.nu) / SQRT2
        U[j, 2 * s + 1] = 1j * phase * (p.mu - p.nu) / SQRT2
    return U


def quadrature_transform(A: np.ndarray, U: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    U = np.asarray(U)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != U.shape[0]:
        raise ValueError(f"dimension mismatch: A {A.shape}, U {U.shape}")
    return U.conj().T @ A @ U


def split_hamiltonian_dissipator(At: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``R = -i (At - At^dag)`` and ``L = At + At^dag``."""
    At = np.asarray(At, dtype=complex)
    if At.ndim != 2 or At.shape[0] != At.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {At.shape}")
    Ah = At.conj().T
    return -1j * (At - Ah), At + Ah


def effective_matrices(chain: InteractionChain) -> EffectiveMatrices:
    A = build_pass_matrix(chain)
    U = quadrature_map(chain)
    At = quadrature_transform(A, U)
    R, L = split_hamiltonian_dissipator(At)
    return EffectiveMatrices(A, U, At, R, L)


def _tolerance(L: np.ndarray, tol: float | None, scale: float = 0.0) -> float:
    norm = float(np.linalg.norm(L, 2)) if L.size else 0.0
    rel = DEFAULT_PSD_TOL if tol is None else tol
    return rel * max(norm, scale, np.finfo(float).tiny)


def jump_operators(L: np.ndarray, tol: float | None = None,
                   scale: float = 0.0) -> list[JumpOperator]:
    """Unravel ``L = sum_k rate_k e_k e_k^dag`` into jump operators, largest rate first.

    ``tol`` is relative to the larger of the spectral norm of ``L`` and
    ``scale``.  Pass the norm of the pass matrix as ``scale`` when ``L`` may
    cancel to roundoff.  Eigenvalues in ``(-tol, tol]`` are treated as zero
    and dropped; anything more negative raises :class:`NotPSDError`.
    """
    L = np.asarray(L, dtype=complex)
    atol = _tolerance(L, tol, scale)
    vals, vecs = np.linalg.eigh((L + L.conj().T) / 2)
    if vals.size and vals[0] < -atol:
        raise NotPSDError(f"dissipator not PSD: eigenvalue {vals[0]:.3e} < -{atol:.1e}")
    jumps = [JumpOperator(float(v), vecs[:, k].copy())
             for k, v in enumerate(vals) if v > atol]
    jumps.sort(key=lambda j: -j.rate)
    return jumps


def assert_psd(L: np.ndarray, tol: float | None = None, chain=None) -> PSDCertificate:
    L = np.asarray(L, dtype=complex)
    atol = _tolerance(L, tol)
    min_eig = float(np.linalg.eigvalsh((L + L.conj().T) / 2)[0]) if L.size else 0.0
    if min_eig < -atol:
        where = f" for chain {chain!r}" if chain is not None else ""
        raise NotPSDError(f"min eigenvalue {min_eig:.3e} < -{atol:.1e}{where}")
    return PSDCertificate(min_eig, atol)


def mn_matrix(link_etas, n: int) -> tuple[np.ndarray, float]:
    """``M_ij = eta_ij`` off the diagonal and 1 on it, with its smallest eigenvalue.

    Uses the first ``n - 1`` link transmissions.
    """
    etas = [float(e) for e in link_etas][: max(n - 1, 0)]
    if len(etas) < n - 1:
        raise ValueError(f"need {n - 1} link transmissions, got {len(etas)}")
    M = np.eye(n)
    for j in range(n):
        for k in range(j):
            M[j, k] = M[k, j] = math.prod(etas[k:j])
    return M, float(np.linalg.eigvalsh(M)[0])


def system_blocks(M: np.ndarray, n_systems: int):
    """Yield the 2x2 diagonal block of a quadrature-basis matrix for each system."""
    for s in range(n_systems):
        yield M[2 * s:2 * s + 2, 2 * s:2 * s + 2]


def backaction_rates(chain: InteractionChain) -> dict[int, float]:
    """Light-induced diffusion rate per system: trace of its diagonal block of ``L``.

    For the 1-2-1 loop this reproduces ``2 g1^2 (1 + eta1 eta2 cos(phi))`` and
    ``g2^2``; for the double loop ``2 g_i^2 (1 - eta^2)``.
    """
    L = effective_matrices(chain).L
    return {s.id: float(np.trace(block).real)
            for s, block in zip(chain.systems, system_blocks(L, chain.n_systems))}


def system_coupling_matrix(chain: InteractionChain, atol: float = 1e-12) -> np.ndarray:
    """Collapse ``A`` onto one operator per system.

    Each system's reference operator is that of its first pass; later passes
    must have the same ``theta`` and differ only by an optical phase, so
    ``B_j = exp(i (phi_j - phi_ref)) B_ref``.  Returns ``A_sys`` with
    ``A = sum_st A_sys[s, t] B_s^dag B_t``.
    """
    A = build_pass_matrix(chain)
    idx = chain.pass_system_indices()
    P = np.zeros((chain.n_passes, chain.n_systems), dtype=complex)
    ref = {}
    for j, (p, s) in enumerate(zip(chain.passes, idx)):
        if s not in ref:
            ref[s] = p
        r = ref[s]
        if abs(math.cos(p.theta) - math.cos(r.theta)) > atol or \
                abs(math.sin(p.theta) - math.sin(r.theta)) > atol:
            raise ValueError(
                f"pass {j + 1}: theta differs from the first pass on system {p.system}; "
                "no single system operator exists"
            )
        P[j, s] = np.exp(1j * (p.phi - r.phi))
    return P.conj().T @ A @ P


def reference_quadrature_map(chain: InteractionChain) -> np.ndarray:
    """Quadrature rows of each system's reference operator (first pass), N x 2N."""
    U = quadrature_map(chain)
    rows = np.zeros((chain.n_systems, U.shape[1]), dtype=complex)
    seen = set()
    for j, s in enumerate(chain.pass_system_indices()):
        if s not in seen:
            rows[s] = U[j]
            seen.add(s)
    return rows
