"""Gaussian covariance dynamics ``dC/dt = F C + C F^T + N``.

Quadratures are ordered ``(X_1, P_1, ..., X_N, P_N)`` with ``[X_i, P_j] = i delta_ij``,
so the vacuum covariance is ``I/2``.  Everything runs in the lab frame: the
local blocks carry each oscillator's frequency and intrinsic thermal bath.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from cascadesim.chain import InteractionChain, SystemSpec
from cascadesim.errors import NonPhysicalStateError, UnstableDynamicsError
from cascadesim.meq import effective_matrices

PHYSICALITY_TOL = 1e-6


@dataclass(frozen=True)
class DriftDiffusion:
    F: np.ndarray
    N: np.ndarray

    @property
    def dim(self) -> int:
        return self.F.shape[0]


@lru_cache(maxsize=16)
def _symplectic(n_modes: int) -> np.ndarray:
    J = np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    J.setflags(write=False)
    return J


def symplectic_form(n_modes: int) -> np.ndarray:
    return _symplectic(n_modes).copy()


def local_drift_diffusion(systems) -> DriftDiffusion:
    n = len(systems)
    F = np.zeros((2 * n, 2 * n))
    N = np.zeros((2 * n, 2 * n))
    for i, s in enumerate(systems):
        sl = slice(2 * i, 2 * i + 2)
        F[sl, sl] = [[-s.gamma / 2, s.omega], [-s.omega, -s.gamma / 2]]
        N[sl, sl] = s.gamma_th * np.eye(2)
    return DriftDiffusion(F, N)


def drift_diffusion(chain: InteractionChain, At: np.ndarray | None = None) -> DriftDiffusion:
    """Drift ``F = F_local + 2 J Im(At)`` and diffusion ``N = N_local + J Re(At + At^T) J^T``.

    ``At`` defaults to the chain's quadrature-basis coupling matrix; pass a
    modified one (e.g. with delay corrections) to reuse the same assembly.
    """
    local = local_drift_diffusion(chain.systems)
    if At is None:
        if chain.n_passes == 0:
            return local
        At = effective_matrices(chain).At
    J = _symplectic(chain.n_systems)
    F = local.F + 2 * J @ At.imag
    N = local.N + J @ (At + At.T).real @ J.T
    return DriftDiffusion(F, (N + N.T) / 2)


def thermal_state(systems) -> np.ndarray:
    diag = []
    for s in systems:
        nbar = s.nbar if isinstance(s, SystemSpec) else float(s)
        diag += [nbar + 0.5, nbar + 0.5]
    return np.diag(diag)


def min_physical_eigenvalue(C: np.ndarray) -> float:
    """Smallest eigenvalue of ``C + iJ/2``; negative means the state violates uncertainty."""
    J = _symplectic(C.shape[0] // 2)
    return float(np.linalg.eigvalsh(C + 0.5j * J)[0])


def is_physical(C: np.ndarray, tol: float = PHYSICALITY_TOL) -> bool:
    return min_physical_eigenvalue(C) >= -_physical_tol(C, tol)


def _physical_tol(C, tol):
    # Rounding in eigvalsh scales with the largest variance; growing
    # (parametrically amplified) states need this floor.
    return tol + 1e-12 * float(np.abs(C).max())


def default_dt(fd: DriftDiffusion) -> float:
    """``0.01`` over the fastest scale of the drift (frequencies and rates)."""
    scale = max(float(np.abs(np.linalg.eigvals(fd.F)).max(initial=0.0)),
                float(np.abs(fd.F).max(initial=0.0)), 1e-12)
    return 0.01 / scale


def _rk4_affine(M: np.ndarray, n: np.ndarray, h: float):
    """One classical RK4 step of ``y' = M y + n`` written as ``y -> T y + s``.

    For a linear autonomous ODE the four RK stages collapse exactly to the
    fourth-order Taylor polynomial of ``h M``.
    """
    d = M.shape[0]
    hM = h * M
    I = np.eye(d)
    hM2 = hM @ hM
    hM3 = hM2 @ hM
    T = I + hM + hM2 / 2 + hM3 / 6 + hM3 @ hM / 24
    s = h * (I + hM / 2 + hM2 / 6 + hM3 / 24) @ n
    return T, s


def _affine_power(T: np.ndarray, s: np.ndarray, m: int):
    """``m``-fold composition of ``y -> T y + s``."""
    d = T.shape[0]
    aug = np.zeros((d + 1, d + 1))
    aug[:d, :d] = T
    aug[:d, d] = s
    aug[d, d] = 1.0
    P = np.linalg.matrix_power(aug, m)
    return P[:d, :d], P[:d, d]


def evolve(fd: DriftDiffusion, C0: np.ndarray, t_grid, dt: float | None = None,
           check_physical: bool = True) -> list[np.ndarray]:
    """Covariance at each time in ``t_grid`` (starting at 0) by fixed-step RK4.

    Each interval between grid points is split into equal steps no longer than
    ``dt``.  Raises :class:`NonPhysicalStateError` if an output violates the
    uncertainty relation by more than ``1e-6``, which signals a step that is
    too large.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must start at 0 and be strictly increasing")
    dt = default_dt(fd) if dt is None else float(dt)
    if not dt > 0:
        raise ValueError("dt must be positive")
    d = fd.dim
    I = np.eye(d)
    M = np.kron(fd.F, I) + np.kron(I, fd.F)
    nvec = fd.N.reshape(-1)
    y = np.asarray(C0, dtype=float).reshape(-1).copy()

    cache = {}
    out = [_symmetrize(y.reshape(d, d))]
    for delta in np.diff(t):
        m = max(1, math.ceil(delta / dt - 1e-9))
        key = (m, round(delta / m, 15))
        # Overflow from an unstable step is caught by the finiteness check below.
        with np.errstate(over="ignore", invalid="ignore"):
            if key not in cache:
                T, s = _rk4_affine(M, nvec, delta / m)
                cache[key] = _affine_power(T, s, m) if m > 1 else (T, s)
            Tm, sm = cache[key]
            y = Tm @ y + sm
        C = _symmetrize(y.reshape(d, d))
        y = C.reshape(-1)
        if not np.all(np.isfinite(C)):
            raise NonPhysicalStateError("covariance diverged to non-finite values; use a smaller dt")
        if check_physical:
            lam = min_physical_eigenvalue(C)
            if lam < -_physical_tol(C, PHYSICALITY_TOL):
                raise NonPhysicalStateError(
                    f"covariance became non-physical (eigenvalue {lam:.2e}); use a smaller dt"
                )
        out.append(C)
    return out


def evolve_means(fd: DriftDiffusion, q0, t_grid, dt: float | None = None) -> list[np.ndarray]:
    """First moments ``dQ/dt = F Q`` by fixed-step RK4 (zero for the states used here)."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must start at 0 and be strictly increasing")
    dt = default_dt(fd) if dt is None else float(dt)
    q = np.asarray(q0, dtype=float).copy()
    zero = np.zeros_like(q)
    out = [q.copy()]
    for delta in np.diff(t):
        m = max(1, math.ceil(delta / dt - 1e-9))
        T, _ = _rk4_affine(fd.F, zero, delta / m)
        q = np.linalg.matrix_power(T, m) @ q
        out.append(q.copy())
    return out


def _symmetrize(C):
    return (C + C.T) / 2


def steady_state(fd: DriftDiffusion) -> np.ndarray:
    """Solve ``F C + C F^T + N = 0`` (Bartels-Stewart, one refinement step).

    Raises :class:`UnstableDynamicsError` carrying the offending eigenvalue if
    ``F`` is not Hurwitz.
    """
    eig = np.linalg.eigvals(fd.F)
    worst = eig[np.argmax(eig.real)]
    if worst.real >= 0:
        raise UnstableDynamicsError(
            f"unstable dynamics: drift eigenvalue {worst:.4g} has non-negative real part",
            eigenvalue=complex(worst),
        )
    C = solve_continuous_lyapunov(fd.F, -fd.N)
    C += solve_continuous_lyapunov(fd.F, -(fd.F @ C + C @ fd.F.T + fd.N))
    return _symmetrize(C)


def lyapunov_residual(fd: DriftDiffusion, C: np.ndarray) -> float:
    return float(np.linalg.norm(fd.F @ C + C @ fd.F.T + fd.N))


def phonon_numbers(C: np.ndarray) -> list[float]:
    """``n_i = (Var X_i + Var P_i - 1) / 2``."""
    d = np.diag(C)
    return [float((d[2 * i] + d[2 * i + 1] - 1) / 2) for i in range(len(d) // 2)]
