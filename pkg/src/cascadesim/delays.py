"""Propagation delays between passes.

A pass at time ``tau_j`` sees system ``s_k`` as it was at ``t - tau_jk``.  For
a freely rotating oscillator ``B_k(t - tau) = cos(eps) B_k + i sin(eps) B_k^-``
with ``B^- = e^{i phi} (mu b - nu b^dag)`` and ``eps_jk = Omega_{s_k} tau_jk``.
The first-order model keeps ``B_k + i eps B_k^-``; the ``"exact"`` model keeps
the full rotation, which is what produces the ``1 - cos(eps)`` loss of
back-action cancellation.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from cascadesim.chain import ChainError, InteractionChain
from cascadesim.meq import SQRT2, build_pass_matrix, quadrature_map, quadrature_transform

LARGE_PHASE = 0.3
VALIDITY_THRESHOLD = 0.1


class DelayWarning(UserWarning):
    """A delay phase is too large for the first-order expansion."""


@dataclass(frozen=True)
class DelaySpec:
    """Arrival times ``tau_j`` of the light at each pass (nondecreasing)."""

    taus: tuple[float, ...]

    def __post_init__(self):
        taus = tuple(float(t) for t in self.taus)
        object.__setattr__(self, "taus", taus)
        if any(not math.isfinite(t) for t in taus):
            raise ChainError("delays: arrival times must be finite")
        for j in range(1, len(taus)):
            if taus[j] < taus[j - 1]:
                raise ChainError(f"delays[{j}]: arrival times must be nondecreasing")

    def tau(self, j: int, k: int) -> float:
        """``tau_j - tau_k`` (0-based pass indices)."""
        return self.taus[j] - self.taus[k]


def _check(chain: InteractionChain, delays: DelaySpec):
    if len(delays.taus) != chain.n_passes:
        raise ChainError(
            f"delays: expected {chain.n_passes} arrival times, got {len(delays.taus)}"
        )


def phase_matrix(chain: InteractionChain, delays: DelaySpec) -> np.ndarray:
    """``E_jk = Omega_{s_k} tau_jk`` below the diagonal, zero elsewhere."""
    _check(chain, delays)
    n = chain.n_passes
    E = np.zeros((n, n))
    for j in range(n):
        for k in range(j):
            E[j, k] = chain.systems[chain.system_index(chain.passes[k].system)].omega \
                * delays.tau(j, k)
    return E


def conjugate_quadrature_map(chain: InteractionChain) -> np.ndarray:
    """Rows give ``B_j^- = e^{i phi_j} (mu_j b - nu_j b^dag)`` in the quadrature basis."""
    U = np.zeros((chain.n_passes, 2 * chain.n_systems), dtype=complex)
    for j, (p, s) in enumerate(zip(chain.passes, chain.pass_system_indices())):
        phase = cmath.exp(1j * p.phi)
        U[j, 2 * s] = phase * (p.mu - p.nu) / SQRT2
        U[j, 2 * s + 1] = 1j * phase * (p.mu + p.nu) / SQRT2
    return U


def delay_corrected_matrix(chain: InteractionChain, delays: DelaySpec,
                           order: int | str = 1) -> np.ndarray:
    """Quadrature-basis coupling ``At`` with delayed operators in the cross terms.

    ``order=1`` returns ``U^dag A U + i U^dag (E o A_off) U^-``; ``order="exact"``
    replaces ``A_off`` by ``A_off o cos(E)`` in the first term and ``eps`` by
    ``sin(eps)`` in the second.  Warns with :class:`DelayWarning` when some
    ``|eps_jk|`` exceeds 0.3.
    """
    if order not in (1, "exact"):
        raise ValueError(f"order must be 1 or 'exact', got {order!r}")
    E = phase_matrix(chain, delays)
    A = build_pass_matrix(chain)
    U = quadrature_map(chain)
    if not E.any():
        return quadrature_transform(A, U)
    worst = float(np.abs(E).max())
    if worst > LARGE_PHASE:
        warnings.warn(f"delay phase {worst:.3g} exceeds {LARGE_PHASE}; "
                      "first-order expansion is unreliable", DelayWarning, stacklevel=2)
    Um = conjugate_quadrature_map(chain)
    diag = np.diag(np.diag(A))
    off = A - diag
    if order == 1:
        direct, twisted = off, E * off
    else:
        direct, twisted = np.cos(E) * off, np.sin(E) * off
    At = quadrature_transform(diag + direct, U)
    return At + 1j * (U.conj().T @ twisted @ Um)


@dataclass(frozen=True)
class DelayPairReport:
    j: int
    k: int
    margin: float | None
    ok: bool | None
    note: str = ""


def delay_validity(chain: InteractionChain, delays: DelaySpec,
                   threshold: float = VALIDITY_THRESHOLD) -> list[DelayPairReport]:
    """Check ``eta_jk g_j g_k Q_j tau_jk < threshold`` for every pair ``k < j``.

    ``Q_j = |Omega_{s_j}| / gamma_{s_j}``.  Pairs on an undamped system get
    ``ok=None`` and the note ``"undefined Q"``.  Pass indices are 1-based.
    """
    _check(chain, delays)
    g = [p.g for p in chain.passes]
    out = []
    for j in range(chain.n_passes):
        sj = chain.systems[chain.system_index(chain.passes[j].system)]
        for k in range(j):
            eta = math.prod(chain.link_etas[k:j])
            if sj.gamma == 0:
                out.append(DelayPairReport(j + 1, k + 1, None, None, "undefined Q"))
                continue
            margin = eta * g[j] * g[k] * (abs(sj.omega) / sj.gamma) * delays.tau(j, k)
            out.append(DelayPairReport(j + 1, k + 1, margin, margin < threshold))
    return out


def suppression_factor(eta1: float, eta2: float, omega_tau: float,
                       phi: float = math.pi) -> tuple[complex, float]:
    """Residual back-action amplitude of a delayed 1-2-1 loop and the compensating phase.

    Returns ``1 + eta1 eta2 exp(-i phi) exp(i omega_tau)`` and
    ``phi_comp = pi + omega_tau``, at which ``|factor| = 1 - eta1 eta2``.
    """
    factor = 1 + eta1 * eta2 * cmath.exp(-1j * phi) * cmath.exp(1j * omega_tau)
    return factor, math.pi + omega_tau
