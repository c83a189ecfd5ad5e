"""Domain model for oscillators coupled in sequence to a traveling light mode.

An :class:`InteractionChain` lists the systems, the ordered optical passes and
the amplitude transmissions of the links between consecutive passes.  Rates are
dimensionless, in units of a reference frequency, and hbar = 1.
"""

from __future__ import annotations

import json
import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np


class ChainError(ValueError):
    """Invalid chain description; the message names the offending location."""


@dataclass(frozen=True)
class SystemSpec:
    id: int
    omega: float = 1.0
    gamma: float = 0.0
    nbar: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.omega):
            raise ChainError(f"system {self.id}: omega must be finite")
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise ChainError(f"system {self.id}: gamma must be >= 0")
        if not (self.nbar >= 0 and math.isfinite(self.nbar)):
            raise ChainError(f"system {self.id}: nbar must be >= 0")

    @property
    def gamma_th(self) -> float:
        """Thermal decoherence rate gamma * (nbar + 1/2)."""
        return self.gamma * (self.nbar + 0.5)


@dataclass(frozen=True)
class Pass:
    """One light-matter interaction ``g (B^dag a + a^dag B)``.

    ``B = exp(i phi) (cos(theta) b + sin(theta) b^dag)`` acts on ``system``.
    """

    system: int
    g: float
    theta: float = math.pi / 4
    phi: float = 0.0

    def __post_init__(self):
        if not (self.g >= 0 and math.isfinite(self.g)):
            raise ChainError(f"pass on system {self.system}: g must be >= 0")
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ChainError(f"pass on system {self.system}: angles must be finite")

    @property
    def mu(self) -> float:
        return math.cos(self.theta)

    @property
    def nu(self) -> float:
        return math.sin(self.theta)


@dataclass(frozen=True)
class InteractionChain:
    systems: tuple[SystemSpec, ...]
    passes: tuple[Pass, ...]
    link_etas: tuple[float, ...] = ()
    pump_copropagating: bool = False
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "systems", tuple(self.systems))
        object.__setattr__(self, "passes", tuple(self.passes))
        object.__setattr__(self, "link_etas", tuple(float(e) for e in self.link_etas))
        ids = [s.id for s in self.systems]
        if len(set(ids)) != len(ids):
            raise ChainError("systems: duplicate system id")
        index = {sid: i for i, sid in enumerate(ids)}
        object.__setattr__(self, "_index", index)
        for j, p in enumerate(self.passes):
            if p.system not in index:
                raise ChainError(f"passes[{j}].system: unknown system reference {p.system}")
        if self.passes and len(self.link_etas) != len(self.passes) - 1:
            raise ChainError(
                f"link_etas: expected {len(self.passes) - 1} entries, got {len(self.link_etas)}"
            )
        for j, eta in enumerate(self.link_etas):
            if not (0.0 <= eta <= 1.0):
                raise ChainError(f"link_etas[{j}]: transmission out of range [0, 1]: {eta}")

    @property
    def n_systems(self) -> int:
        return len(self.systems)

    @property
    def n_passes(self) -> int:
        return len(self.passes)

    def system_index(self, system_id: int) -> int:
        """Position of a system in the quadrature ordering (X_1, P_1, X_2, ...)."""
        return self._index[system_id]

    def pass_system_indices(self) -> list[int]:
        return [self._index[p.system] for p in self.passes]

    def replace(self, **changes) -> "InteractionChain":
        data = dict(systems=self.systems, passes=self.passes,
                    link_etas=self.link_etas, pump_copropagating=self.pump_copropagating)
        data.update(changes)
        return InteractionChain(**data)


def transmittance(chain: InteractionChain, j: int, k: int) -> float:
    """Amplitude transmission from pass ``k`` to pass ``j`` (1-based, k <= j).

    ``eta_jk = eta_k * ... * eta_{j-1}`` and ``eta_jj = 1``.
    """
    n = chain.n_passes
    if not (1 <= k <= j <= n):
        raise ChainError(f"transmittance: need 1 <= k <= j <= {n}, got j={j}, k={k}")
    return math.prod(chain.link_etas[k - 1:j - 1])


def transmittance_matrix(chain: InteractionChain) -> np.ndarray:
    """Lower-triangular matrix T with T[j, k] = eta_jk (0-based), ones on the diagonal."""
    n = chain.n_passes
    T = np.zeros((n, n))
    for j in range(n):
        T[j, j] = 1.0
        for k in range(j - 1, -1, -1):
            T[j, k] = T[j, k + 1] * chain.link_etas[k]
    return T


def pump_rescaled_couplings(chain: InteractionChain) -> list[float]:
    """Couplings after rescaling by the pump transmission ``eta_j1`` if the pump co-propagates."""
    gs = [p.g for p in chain.passes]
    if not chain.pump_copropagating:
        return gs
    scale = 1.0
    out = []
    for j, g in enumerate(gs):
        if j > 0:
            scale *= chain.link_etas[j - 1]
        out.append(scale * g)
    return out


# -- serialization ---------------------------------------------------------

def chain_to_dict(chain: InteractionChain) -> dict:
    return {
        "systems": [
            {"id": s.id, "omega": s.omega, "gamma": s.gamma, "nbar": s.nbar}
            for s in chain.systems
        ],
        "passes": [
            {"system": p.system, "g": p.g, "theta": p.theta, "phi": p.phi}
            for p in chain.passes
        ],
        "link_etas": list(chain.link_etas),
        "pump_copropagating": chain.pump_copropagating,
    }


def serialize_chain(chain: InteractionChain) -> str:
    return json.dumps(chain_to_dict(chain), indent=2)


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ChainError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _require(obj, key, where):
    if key not in obj:
        raise ChainError(f"{where}: missing key {key!r}")
    return obj[key]


def parse_chain(doc) -> InteractionChain:
    """Build a validated chain from a JSON document (string) or an already-decoded mapping."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ChainError(f"malformed document: {exc}") from None
    if not isinstance(doc, Mapping):
        raise ChainError("document: top level must be an object")
    unknown = set(doc) - {"systems", "passes", "link_etas", "pump_copropagating"}
    if unknown:
        raise ChainError(f"document: unknown keys {sorted(unknown)}")

    raw_systems = _require(doc, "systems", "document")
    if not isinstance(raw_systems, list) or not raw_systems:
        raise ChainError("systems: expected a non-empty array")
    systems = []
    for i, s in enumerate(raw_systems):
        where = f"systems[{i}]"
        if not isinstance(s, Mapping):
            raise ChainError(f"{where}: expected an object")
        sid = _require(s, "id", where)
        if isinstance(sid, bool) or not isinstance(sid, int):
            raise ChainError(f"{where}.id: expected an integer")
        try:
            systems.append(SystemSpec(
                id=sid,
                omega=_number(s.get("omega", 1.0), f"{where}.omega"),
                gamma=_number(s.get("gamma", 0.0), f"{where}.gamma"),
                nbar=_number(s.get("nbar", 0.0), f"{where}.nbar"),
            ))
        except ChainError as exc:
            raise ChainError(f"{where}: {exc}") from None

    raw_passes = _require(doc, "passes", "document")
    if not isinstance(raw_passes, list) or not raw_passes:
        raise ChainError("passes: empty pass list")
    passes = []
    for j, p in enumerate(raw_passes):
        where = f"passes[{j}]"
        if not isinstance(p, Mapping):
            raise ChainError(f"{where}: expected an object")
        sysref = _require(p, "system", where)
        if isinstance(sysref, bool) or not isinstance(sysref, int):
            raise ChainError(f"{where}.system: expected an integer")
        try:
            passes.append(Pass(
                system=sysref,
                g=_number(_require(p, "g", where), f"{where}.g"),
                theta=_number(p.get("theta", math.pi / 4), f"{where}.theta"),
                phi=_number(p.get("phi", 0.0), f"{where}.phi"),
            ))
        except ChainError as exc:
            raise ChainError(f"{where}: {exc}") from None

    raw_etas = doc.get("link_etas", [])
    if not isinstance(raw_etas, list):
        raise ChainError("link_etas: expected an array")
    etas = [_number(e, f"link_etas[{j}]") for j, e in enumerate(raw_etas)]

    pump = doc.get("pump_copropagating", False)
    if not isinstance(pump, bool):
        raise ChainError("pump_copropagating: expected a boolean")

    return InteractionChain(systems=tuple(systems), passes=tuple(passes),
                            link_etas=tuple(etas), pump_copropagating=pump)
