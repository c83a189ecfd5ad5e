"""Figures of merit: coupling weights, cooperativity and two-mode entanglement."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cascadesim.chain import InteractionChain
from cascadesim.meq import system_coupling_matrix

COOPERATIVITY_SCHEMES = ("loop121", "loop121_pump", "double_loop")


@dataclass(frozen=True)
class RateSet:
    """Scalar rates of a two-system geometry.

    ``g`` is the coherent coupling; ``Gamma`` the light-induced back-action per
    system; ``Gamma_12`` the collective dissipation; ``self_interaction`` the
    light-induced frequency shift of each system's operator ``B_i^dag B_i``.
    """

    g: float
    Gamma: tuple[float, ...]
    Gamma_12: float = 0.0
    gamma_th: tuple[float, ...] = (0.0, 0.0)
    self_interaction: tuple[float, ...] = (0.0, 0.0)

    @property
    def gamma_tot(self) -> tuple[float, ...]:
        return tuple(th + G / 2 for th, G in zip(self.gamma_th, self.Gamma))


def chain_rates(chain: InteractionChain) -> RateSet:
    """Read the rates of a two-system chain off its system-level coupling matrix.

    With ``A_sys`` the coupling collapsed onto one operator per system,
    ``R = -i (A_sys - A_sys^dag)`` and ``L = A_sys + A_sys^dag``:
    ``g = |R_21|``, ``Gamma_i = L_ii``, ``Gamma_12 = |L_21|``.
    """
    if chain.n_systems != 2:
        raise ValueError("chain_rates needs exactly two systems")
    A = system_coupling_matrix(chain)
    R = -1j * (A - A.conj().T)
    L = A + A.conj().T
    return RateSet(
        g=float(abs(R[1, 0])),
        Gamma=(float(L[0, 0].real), float(L[1, 1].real)),
        Gamma_12=float(abs(L[1, 0])),
        gamma_th=tuple(s.gamma_th for s in chain.systems),
        self_interaction=(float(R[0, 0].real / 2), float(R[1, 1].real / 2)),
    )


def bs_tms_weights(theta1: float, theta2: float) -> tuple[float, float]:
    """Beam-splitter and two-mode-squeezing weights ``(cos(t1+t2)/2, sin(t1-t2)/2)``."""
    return math.cos(theta1 + theta2) / 2, math.sin(theta1 - theta2) / 2


def cooperativity_generic(rates: RateSet) -> float:
    g1, g2 = rates.gamma_tot
    if g1 <= 0 or g2 <= 0:
        raise ZeroDivisionError(
            f"infinite cooperativity: total decoherence rates {rates.gamma_tot} (g = {rates.g})"
        )
    return rates.g**2 / (g1 * g2)


def _scheme_rates(scheme, eta):
    """Rates per unit g1 = g2 = 1 for equal link transmissions ``eta``."""
    e2 = eta * eta
    if scheme == "loop121":
        return 2 * eta, (2 * (1 - e2), 1.0)
    if scheme == "loop121_pump":
        return e2 + e2 * e2, (1 - e2 * e2, e2)
    if scheme == "double_loop":
        return eta * (3 - e2), (2 * (1 - e2), 2 * (1 - e2))
    raise ValueError(f"unknown scheme {scheme!r}; choose from {COOPERATIVITY_SCHEMES}")


def cooperativity_closed_form(scheme: str, eta: float, c1: float = math.inf,
                              c2: float = math.inf) -> float:
    """Cooperativity of a looped scheme at single-pass cooperativities ``c1, c2``.

    With both ``c`` infinite this is the loss-limited value
    (``8 eta^2/(1 - eta^2)`` for the 1-2-1 loop).  Intrinsic rates enter as
    ``gamma_i,th = g_i^2 / c_i``.
    """
    if not 0 <= eta <= 1:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    g, Gamma = _scheme_rates(scheme, eta)
    e2 = eta * eta
    if math.isinf(c1) and math.isinf(c2):
        if eta == 1:
            raise ZeroDivisionError(f"diverging cooperativity: {scheme} at eta = 1 with c -> inf")
        if scheme == "loop121":
            return 8 * e2 / (1 - e2)
        if scheme == "loop121_pump":
            return 4 * (e2 + e2 * e2) / (1 - e2)
        return e2 * (3 - e2) ** 2 / (1 - e2) ** 2
    if c1 <= 0 or c2 <= 0:
        raise ValueError("single-pass cooperativities must be positive")
    rates = RateSet(g=g, Gamma=Gamma, gamma_th=(1 / c1, 1 / c2))
    return cooperativity_generic(rates)


def _blocks(C):
    C = np.asarray(C, dtype=float)
    if C.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-mode covariance, got {C.shape}")
    return C[:2, :2], C[2:, 2:], C[:2, 2:]


def partial_transpose_invariants(C: np.ndarray) -> tuple[float, float]:
    """``p = det v1 + det v2 - 2 det v12`` and ``q = det C``.

    The symplectic eigenvalues of the partial transpose are
    ``sqrt((p +- sqrt(p^2 - 4q)) / 2)``.
    """
    v1, v2, v12 = _blocks(C)
    p = np.linalg.det(v1) + np.linalg.det(v2) - 2 * np.linalg.det(v12)
    return float(p), float(np.linalg.det(np.asarray(C, dtype=float)))


_PARTIAL_TRANSPOSE = np.diag([1.0, 1.0, 1.0, -1.0])
_IJ = 1j * np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def partial_transpose_symplectic(C: np.ndarray) -> tuple[float, float]:
    """Symplectic eigenvalues ``(c_-, c_+)`` of the partially transposed covariance.

    Computed as the positive eigenvalues of the Hermitian matrix
    ``S (iJ) S`` with ``S`` the square root of the transposed covariance.
    This equals the closed form in ``(p, q)`` but avoids the square-root
    cancellation that closed form suffers when ``c_- ~ c_+`` (product states)
    or when ``c_-`` is tiny.
    """
    v1, v2, v12 = _blocks(C)
    C = np.asarray(C, dtype=float)
    Ct = _PARTIAL_TRANSPOSE @ ((C + C.T) / 2) @ _PARTIAL_TRANSPOSE
    w, V = np.linalg.eigh(Ct)
    if w[0] <= 0:
        raise ValueError(f"non-physical covariance: not positive definite (eigenvalue {w[0]:.3e})")
    p, q = partial_transpose_invariants(C)
    if p * p - 4 * q < -1e-9 * max(p * p, 1e-300):
        raise ValueError(f"non-physical covariance: p^2 - 4q = {p * p - 4 * q:.3e}")
    S = (V * np.sqrt(w)) @ V.T
    ev = np.linalg.eigvalsh(S @ _IJ @ S)
    return float(ev[2]), float(ev[3])


def log_negativity(C: np.ndarray) -> float:
    """``E_N = sum_+- max(0, -log2(2 c_+-))`` for a 4x4 covariance (vacuum = I/2)."""
    return sum(max(0.0, -math.log2(2 * c)) if c > 0 else math.inf
               for c in partial_transpose_symplectic(C))


def epr_variance(C: np.ndarray) -> float:
    """``[Var(X1 + X2) + Var(P1 - P2)] / 2``; below 1 witnesses entanglement."""
    C = np.asarray(C, dtype=float)
    if C.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-mode covariance, got {C.shape}")
    return float(C[0, 0] + C[2, 2] + 2 * C[0, 2] + C[1, 1] + C[3, 3] - 2 * C[1, 3]) / 2


def squeezing_ratio(rates: RateSet, beta: float) -> float:
    """Noise rates over twice the two-mode-squeezing coupling ``g beta``."""
    denom = 2 * rates.g * beta
    if denom == 0:
        raise ZeroDivisionError("squeezing ratio undefined for g * beta = 0")
    noise = sum(rates.gamma_th) + sum(rates.Gamma) / 2
    return noise / denom
