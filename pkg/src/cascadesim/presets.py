"""Named geometries and the parameter sets used for the cooperativity, cooling and
entanglement studies.

Geometry presets (``single_pass``, ``loop121``, ...) need their couplings in
``params``; figure presets (``fig6``, ``fig7``, ``fig8_*``) carry their own
parameters and only take optional overrides such as ``eta``.
"""

from __future__ import annotations

import math

from cascadesim.chain import ChainError, InteractionChain, Pass, SystemSpec

PI = math.pi

GEOMETRY_PRESETS = (
    "single_pass", "loop121", "loop212", "double_loop", "double_pass",
    "self_loop2", "self_loop3",
)
FIGURE_PRESETS = ("fig6", "fig7", "fig8_12", "fig8_121", "fig8_212", "fig8_1212")
PRESETS = GEOMETRY_PRESETS + FIGURE_PRESETS

# Thermal baths for the entanglement study: an inverted oscillator 1 in vacuum
# and a warmer, less damped oscillator 2.
FIG8_GAMMA = (1e-3, 1e-4)
FIG8_NBAR = (0.0, 10.0)
FIG8_COOPERATIVITIES = {
    "fig8_12": (10.0, 10.0),
    "fig8_121": (25.0, 4.0),
    "fig8_212": (4.0, 25.0),
    "fig8_1212": (10.0, 10.0),
}
FIG6_COOPERATIVITIES = (25.0, 4.0)


class UnknownPresetError(ChainError):
    pass


def _get(params, key, default=None, *, required=False):
    if key in params:
        return float(params[key])
    if required:
        raise ChainError(f"preset: missing required param {key!r}")
    return default


def _etas(params, count, names=None):
    """Link transmissions from ``eta1..`` or a common ``eta`` (default 1)."""
    eta = _get(params, "eta", 1.0)
    names = names or [f"eta{i + 1}" for i in range(count)]
    return tuple(_get(params, name, eta) for name in names)


def _systems(params, count):
    out = []
    for i in range(1, count + 1):
        out.append(SystemSpec(
            id=i,
            omega=_get(params, f"omega{i}", 1.0),
            gamma=_get(params, f"gamma{i}", 0.0),
            nbar=_get(params, f"nbar{i}", 0.0),
        ))
    return tuple(out)


def _geometry(name, params) -> InteractionChain:
    pump = bool(params.get("pump_copropagating", False))
    t1 = _get(params, "theta1", PI / 4)
    t2 = _get(params, "theta2", PI / 4)
    p1 = _get(params, "phi1", 0.0)
    p2 = _get(params, "phi2", 0.0)

    if name == "single_pass":
        g1 = _get(params, "g1", required=True)
        g2 = _get(params, "g2", required=True)
        passes = (Pass(1, g1, t1, p1), Pass(2, g2, t2, p2))
        return InteractionChain(_systems(params, 2), passes, _etas(params, 1)[:1], pump)

    if name in ("loop121", "loop212"):
        g1 = _get(params, "g1", required=True)
        g2 = _get(params, "g2", required=True)
        phi = _get(params, "phi", PI)
        first, second = (Pass(1, g1, t1, p1), Pass(2, g2, t2, p2))
        if name == "loop212":
            first, second = second, first
        looped = Pass(first.system, first.g, first.theta, first.phi + phi)
        return InteractionChain(_systems(params, 2), (first, second, looped),
                                _etas(params, 2), pump)

    if name == "double_loop":
        g1 = _get(params, "g1", required=True)
        g2 = _get(params, "g2", required=True)
        phi = _get(params, "phi", PI)
        passes = (Pass(1, g1, t1, p1), Pass(2, g2, t2, p2),
                  Pass(1, g1, t1, p1 + phi), Pass(2, g2, t2, p2 + phi))
        return InteractionChain(_systems(params, 2), passes, _etas(params, 3), pump)

    if name == "double_pass":
        # Forward mode probes 1 then 2; the counter-propagating mode probes 2
        # then 1.  A zero-transmission link separates the two independent modes.
        g1p = _get(params, "g1", required=True)
        g2p = _get(params, "g2", required=True)
        g1m = _get(params, "g1_minus", -g1p)
        g2m = _get(params, "g2_minus", g2p)
        eta = _get(params, "eta", 1.0)

        def signed(system, g, theta, phase):
            return Pass(system, abs(g), theta, phase + (PI if g < 0 else 0.0))

        passes = (signed(1, g1p, t1, p1), signed(2, g2p, t2, p2),
                  signed(2, g2m, t2, p2), signed(1, g1m, t1, p1))
        return InteractionChain(_systems(params, 2), passes, (eta, 0.0, eta), pump)

    if name == "self_loop2":
        g1 = _get(params, "g1", 1.0)
        phi = _get(params, "phi", PI)
        passes = (Pass(1, g1, t1, p1), Pass(1, g1, t1, p1 + phi))
        return InteractionChain(_systems(params, 1), passes, _etas(params, 1)[:1], pump)

    if name == "self_loop3":
        g1 = _get(params, "g1", 1.0)
        phi12 = _get(params, "phi12", _get(params, "phi", 2 * PI / 3))
        phi23 = _get(params, "phi23", _get(params, "phi", 2 * PI / 3))
        passes = (Pass(1, g1, t1, p1), Pass(1, g1, t1, p1 + phi12),
                  Pass(1, g1, t1, p1 + phi12 + phi23))
        return InteractionChain(_systems(params, 1), passes, _etas(params, 2), pump)

    raise UnknownPresetError(f"unknown preset {name!r}")


def _fig6(params) -> InteractionChain:
    """1-2-1 loop with single-pass cooperativities c1 = 25, c2 = 4."""
    c1, c2 = FIG6_COOPERATIVITIES
    gamma = _get(params, "gamma", 1e-3)
    systems = (SystemSpec(1, 1.0, gamma, 0.0), SystemSpec(2, 1.0, gamma, 0.0))
    g1 = math.sqrt(c1 * systems[0].gamma_th)
    g2 = math.sqrt(c2 * systems[1].gamma_th)
    eta = _get(params, "eta", 1.0)
    passes = (Pass(1, g1, PI / 4), Pass(2, g2, -PI / 4), Pass(1, g1, PI / 4, PI))
    return InteractionChain(systems, passes, (eta, eta))


def _fig7(params) -> InteractionChain:
    """Sympathetic cooling: damped cold oscillator 1 looped around a hot oscillator 2.

    ``g`` is the coherent coupling 2 eta g1 g2 at a fixed ratio g1/g2 = 10.
    """
    eta = _get(params, "eta", 1.0)
    g = _get(params, "g", 0.1)
    if eta <= 0:
        raise ChainError("fig7: eta must be > 0")
    ratio = _get(params, "ratio", 10.0)
    g1 = math.sqrt(ratio * g / (2 * eta))
    g2 = g1 / ratio
    systems = (SystemSpec(1, 1.0, 0.1, 0.0), SystemSpec(2, 1.0, 1e-7, 1e4))
    passes = (Pass(1, g1, PI / 4), Pass(2, g2, -PI / 4), Pass(1, g1, PI / 4, PI))
    return InteractionChain(systems, passes, (eta, eta))


def _fig8(name, params) -> InteractionChain:
    eta = _get(params, "eta", 1.0)
    systems = (
        SystemSpec(1, -1.0, FIG8_GAMMA[0], FIG8_NBAR[0]),
        SystemSpec(2, 1.0, FIG8_GAMMA[1], FIG8_NBAR[1]),
    )
    c1, c2 = FIG8_COOPERATIVITIES[name]
    g1 = math.sqrt(c1 * systems[0].gamma_th)
    g2 = math.sqrt(c2 * systems[1].gamma_th)
    theta1 = PI / 4
    theta2 = (0.8 if name == "fig8_12" else -0.8) * PI / 4
    b1 = Pass(1, g1, theta1)
    b2 = Pass(2, g2, theta2)

    def reversed_(p):
        return Pass(p.system, p.g, p.theta, p.phi + PI)

    order = {
        "fig8_12": (b1, b2),
        "fig8_121": (b1, b2, reversed_(b1)),
        "fig8_212": (b2, b1, reversed_(b2)),
        "fig8_1212": (b1, b2, reversed_(b1), reversed_(b2)),
    }[name]
    return InteractionChain(systems, order, (eta,) * (len(order) - 1))


def preset(name: str, params: dict | None = None) -> InteractionChain:
    params = dict(params or {})
    if name in GEOMETRY_PRESETS:
        return _geometry(name, params)
    if name == "fig6":
        return _fig6(params)
    if name == "fig7":
        return _fig7(params)
    if name in FIGURE_PRESETS:
        return _fig8(name, params)
    raise UnknownPresetError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
