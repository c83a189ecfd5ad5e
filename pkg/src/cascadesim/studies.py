"""Data behind the cooperativity, cooling and entanglement studies.

Each function returns plain lists or tuples so that the CLI can write them as
CSV and tests can check them directly.
"""

from __future__ import annotations

import math

import numpy as np

from cascadesim.gaussian import drift_diffusion, evolve, phonon_numbers, steady_state, thermal_state
from cascadesim.metrics import chain_rates, cooperativity_closed_form, cooperativity_generic, \
    epr_variance, log_negativity
from cascadesim.presets import FIG6_COOPERATIVITIES, preset

# Unstable loops: integrate until the fastest mode has grown by this factor in
# variance.  Beyond ~1e10 the covariance loses the precision needed for E_N.
PLATEAU_GROWTH = 1e6
PLATEAU_T_MAX = 2e5
PLATEAU_POINTS = 200
PLATEAU_DT = 0.05


def cooperativity_curves(losses, c1: float = FIG6_COOPERATIVITIES[0],
                         c2: float = FIG6_COOPERATIVITIES[1]):
    """Rows ``(loss, C_single_loop, C_double_loop, C_single_loop_c, C_double_loop_c)``.

    The first two columns are the loss-limited values (``c -> inf``, ``inf`` at
    zero loss); the last two use the finite single-pass cooperativities.
    """
    rows = []
    for loss in losses:
        if not 0 <= loss <= 1:
            raise ValueError(f"loss must lie in [0, 1], got {loss}")
        eta = math.sqrt(1 - loss)
        limited = []
        for scheme in ("loop121", "double_loop"):
            try:
                limited.append(cooperativity_closed_form(scheme, eta))
            except ZeroDivisionError:
                limited.append(math.inf)
        finite = [cooperativity_closed_form(s, eta, c1, c2) for s in ("loop121", "double_loop")]
        rows.append((float(loss), *limited, *finite))
    return rows


def fig6_generic_cooperativity(loss: float) -> float:
    """1-2-1 cooperativity of the ``fig6`` preset read off the matrix pipeline."""
    return cooperativity_generic(chain_rates(preset("fig6", {"eta": math.sqrt(1 - loss)})))


def cooling_point(g: float, eta: float = 1.0) -> tuple[float, float]:
    """Steady-state phonon numbers ``(n_1, n_2)`` of the ``fig7`` preset."""
    chain = preset("fig7", {"g": g, "eta": eta})
    return tuple(phonon_numbers(steady_state(drift_diffusion(chain))))


def cooling_sweep(g_grid, eta: float = 1.0):
    return [(float(g), *cooling_point(g, eta)) for g in g_grid]


def entanglement_trajectory(name: str, t_grid, eta: float = 1.0, dt: float | None = None):
    """Rows ``(t, E_N, Delta_EPR)`` starting from the preset's thermal state."""
    chain = preset(name, {"eta": eta})
    fd = drift_diffusion(chain)
    Cs = evolve(fd, thermal_state(chain.systems), t_grid, dt=dt, check_physical=False)
    return [(float(t), log_negativity(C), epr_variance(C)) for t, C in zip(t_grid, Cs)]


def spectral_abscissa(chain) -> float:
    return float(np.linalg.eigvals(drift_diffusion(chain).F).real.max())


def stationary_covariance(chain) -> np.ndarray:
    """Lyapunov solution if the dynamics are stable, otherwise the late-time plateau.

    For an amplifying drift the covariance grows without bound but its
    entanglement saturates; the plateau is taken where the leading variance
    has grown by :data:`PLATEAU_GROWTH`.
    """
    fd = drift_diffusion(chain)
    lam = float(np.linalg.eigvals(fd.F).real.max())
    if lam < 0:
        return steady_state(fd)
    t_end = PLATEAU_T_MAX if lam == 0 else min(math.log(PLATEAU_GROWTH) / (2 * lam), PLATEAU_T_MAX)
    t = np.linspace(0.0, t_end, PLATEAU_POINTS + 1)
    return evolve(fd, thermal_state(chain.systems), t, dt=PLATEAU_DT, check_physical=False)[-1]


def stationary_log_negativity(name: str, eta: float = 1.0) -> float:
    return log_negativity(stationary_covariance(preset(name, {"eta": eta})))


def entanglement_vs_loss(name: str, losses):
    return [(float(loss), stationary_log_negativity(name, math.sqrt(1 - loss))) for loss in losses]


def entanglement_loss_threshold(name: str, coarse: int = 39, max_loss: float = 0.95,
                                iterations: int = 30) -> float | None:
    """Smallest power loss at which the stationary ``E_N`` reaches zero.

    Scans a coarse grid for the first sign change and bisects it.  Returns
    ``None`` if ``E_N`` stays positive up to ``max_loss``.
    """
    def positive(loss):
        return stationary_log_negativity(name, math.sqrt(1 - loss)) > 0

    grid = np.linspace(0.0, max_loss, coarse)
    prev = grid[0]
    if not positive(prev):
        return 0.0
    for loss in grid[1:]:
        if not positive(loss):
            lo, hi = prev, loss
            for _ in range(iterations):
                mid = (lo + hi) / 2
                lo, hi = (mid, hi) if positive(mid) else (lo, mid)
            return float(hi)
        prev = loss
    return None
