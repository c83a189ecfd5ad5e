"""Closed-form rates of the named geometries.

These formulas are independent of the matrix pipeline in :mod:`cascadesim.meq`
and serve as analytic cross-checks of it.  All geometries here assume the pump
does not co-propagate with the probe light.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from cascadesim.metrics import RateSet

RATE_SCHEMES = ("single_pass", "double_pass", "loop121", "double_loop")
SQUEEZE_SCHEMES = ("two_pass", "three_pass")


@dataclass(frozen=True)
class SqueezeReport:
    """Single-system squeezing from repeated passes, per unit ``g_1^2``.

    ``alpha`` is the complex coefficient of ``B^dag B`` collected over all
    passes: the back-action rate is ``Gamma = 2 Re(alpha)`` and the squeezing
    rate ``g_sq = -Im(alpha)``.
    """

    g_sq: float
    Gamma: float
    r: float
    alpha: complex


def _p(params, key, default=None):
    if key in params:
        return float(params[key])
    if default is None:
        raise ValueError(f"missing parameter {key!r}")
    return default


def _two_etas(params, n):
    eta = _p(params, "eta", 1.0)
    return [_p(params, f"eta{i + 1}", eta) for i in range(n)]


def closed_form_rates(scheme: str, params: dict) -> RateSet:
    """Rates ``g, Gamma_i, Gamma_12`` and self-interactions of a two-system geometry.

    Parameters
    ----------
    scheme : {"single_pass", "double_pass", "loop121", "double_loop"}
    params : dict
        ``g1, g2`` always; ``eta`` or ``eta1, eta2, ...`` for the links (default
        1); ``phi`` for the loops (default pi); ``g1_minus, g2_minus`` for the
        counter-propagating passes of ``double_pass`` (default ``-g1, g2``,
        the time-reversed configuration).
    """
    g1 = _p(params, "g1")
    g2 = _p(params, "g2")

    if scheme == "single_pass":
        eta = _two_etas(params, 1)[0]
        return RateSet(g=eta * g1 * g2, Gamma=(g1**2, g2**2), Gamma_12=eta * g1 * g2)

    if scheme == "double_pass":
        eta = _p(params, "eta", 1.0)
        g1m = _p(params, "g1_minus", -g1)
        g2m = _p(params, "g2_minus", g2)
        forward, backward = g1 * g2, g1m * g2m
        return RateSet(
            g=eta * abs(forward - backward),
            Gamma=(g1**2 + g1m**2, g2**2 + g2m**2),
            Gamma_12=eta * abs(forward + backward),
        )

    phi = _p(params, "phi", math.pi)
    rot = cmath.exp(1j * phi)

    if scheme == "loop121":
        e1, e2 = _two_etas(params, 2)
        return RateSet(
            g=g1 * g2 * abs(e1 - e2 * rot),
            Gamma=(2 * g1**2 * (1 + e1 * e2 * math.cos(phi)), g2**2),
            Gamma_12=g1 * g2 * abs(e1 + e2 * rot),
            self_interaction=(-g1**2 * e1 * e2 * math.sin(phi), 0.0),
        )

    if scheme == "double_loop":
        e1, e2, e3 = _two_etas(params, 3)
        # B_2^dag B_1 collects the links 1->2, 3->4 and 1->4; B_1^dag B_2 only 2->3.
        lower = e1 + e3 + e1 * e2 * e3 / rot
        upper = e2 / rot
        return RateSet(
            g=g1 * g2 * abs(lower - upper.conjugate()),
            Gamma=(2 * g1**2 * (1 + e1 * e2 * math.cos(phi)),
                   2 * g2**2 * (1 + e2 * e3 * math.cos(phi))),
            Gamma_12=g1 * g2 * abs(lower + upper.conjugate()),
            self_interaction=(-g1**2 * e1 * e2 * math.sin(phi),
                              -g2**2 * e2 * e3 * math.sin(phi)),
        )

    raise ValueError(f"unknown scheme {scheme!r}; choose from {RATE_SCHEMES}")


def multipass_alpha(eta: float, phases) -> complex:
    """``sum_{j>=k} c_jk`` for passes on one system with phase steps ``phases``.

    Diagonal terms contribute ``1/2`` each; the pair ``(j, k)`` contributes
    ``eta^(j-k) exp(-i (phi_j - phi_k))``.
    """
    cumulative = [0.0]
    for step in phases:
        cumulative.append(cumulative[-1] + float(step))
    alpha = 0.5 * len(cumulative)
    for j in range(len(cumulative)):
        for k in range(j):
            alpha += eta ** (j - k) * cmath.exp(-1j * (cumulative[j] - cumulative[k]))
    return complex(alpha)


def multipass_squeeze(scheme: str, eta: float, phi: float | None = None,
                      phi12: float | None = None, phi23: float | None = None) -> SqueezeReport:
    """Squeezing of one oscillator probed two or three times with QND coupling.

    ``two_pass`` takes ``phi`` (the phase between passes); ``three_pass`` takes
    ``phi12`` and ``phi23``, each defaulting to ``phi`` and then to ``2 pi/3``.
    """
    if not 0 < eta <= 1:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    if scheme == "two_pass":
        if phi is None:
            raise ValueError("two_pass needs phi")
        steps = (phi,)
    elif scheme == "three_pass":
        default = 2 * math.pi / 3 if phi is None else phi
        steps = (default if phi12 is None else phi12,
                 default if phi23 is None else phi23)
    else:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SQUEEZE_SCHEMES}")
    alpha = multipass_alpha(eta, steps)
    g_sq = -alpha.imag
    if abs(g_sq) <= 1e-15 * max(1.0, abs(alpha)):
        raise ZeroDivisionError(f"no squeezing: Im(alpha) = 0 for phases {steps}")
    Gamma = 2 * alpha.real
    return SqueezeReport(g_sq=g_sq, Gamma=Gamma, r=(Gamma / 2) / abs(g_sq), alpha=alpha)


def two_pass_optimal_phase(eta: float) -> float:
    """Phase minimizing the two-pass noise ratio: ``cos(phi) = -eta``, in ``(pi/2, pi]``."""
    if not 0 < eta <= 1:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    return math.acos(-eta)
