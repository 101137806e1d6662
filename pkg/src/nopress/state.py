"""Game state, phase calendar, and ownership bookkeeping.

States are immutable values; every transition builds a new one. The
canonical phase code grammar is ``[SFW]<year>[MRA]`` (e.g. ``S1901M``)
and is bit-exact in records and protocol messages.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .errors import PhaseError, StateError
from .map import ARMY, FLEET, MapGraph

SPRING, FALL, WINTER = "S", "F", "W"
MOVEMENT, RETREAT, ADJUSTMENT = "M", "R", "A"

_PHASE_RE = re.compile(r"^([SFW])(\d{4})([MRA])$")


@dataclass(frozen=True, order=True)
class Phase:
    year: int
    season: str
    kind: str

    def __post_init__(self):
        if self.season == WINTER and self.kind != ADJUSTMENT:
            raise PhaseError(f"winter phase must be adjustment, got {self.kind}")
        if self.season != WINTER and self.kind == ADJUSTMENT:
            raise PhaseError(f"adjustment only happens in winter, got {self.season}")

    @property
    def code(self) -> str:
        return f"{self.season}{self.year}{self.kind}"

    @classmethod
    def parse(cls, code: str) -> "Phase":
        m = _PHASE_RE.match(code)
        if not m:
            raise PhaseError(f"bad phase code {code!r}")
        return cls(int(m.group(2)), m.group(1), m.group(3))

    def __str__(self) -> str:
        return self.code


@dataclass(frozen=True, order=True)
class Unit:
    kind: str   # "A" | "F"
    loc: str    # canonical location name, coast-qualified for fleets
    power: str

    @property
    def text(self) -> str:
        return f"{self.kind} {self.loc}"


@dataclass(frozen=True, order=True)
class Dislodged:
    unit: Unit
    #: province the dislodging move came from; None when it arrived by convoy
    attacker_origin: str | None


@dataclass(frozen=True)
class GameState:
    phase: Phase
    units: tuple[Unit, ...]
    dislodged: tuple[Dislodged, ...]
    sc_ownership: dict[str, str]     # owned centers only; neutrals absent
    standoffs: frozenset[str]

    def units_of(self, power: str) -> tuple[Unit, ...]:
        return tuple(u for u in self.units if u.power == power)

    def unit_at(self, map: MapGraph, province_or_loc: str) -> Unit | None:
        """The non-dislodged unit in a province (coasts collapse)."""
        p = map.province_of(province_or_loc)
        for u in self.units:
            if map.province_of(u.loc) == p:
                return u
        return None

    def occupied(self, map: MapGraph) -> dict[str, Unit]:
        return {map.province_of(u.loc): u for u in self.units}

    def owned_centers(self, power: str) -> frozenset[str]:
        return frozenset(p for p, o in self.sc_ownership.items() if o == power)

    def owner_of(self, province: str) -> str | None:
        return self.sc_ownership.get(province)


def _sorted_units(units) -> tuple[Unit, ...]:
    return tuple(sorted(units, key=lambda u: (u.loc, u.kind, u.power)))


def make_state(phase, units, dislodged=(), sc_ownership=None, standoffs=()) -> GameState:
    """Normalized constructor: sorts units, freezes collections."""
    return GameState(
        phase=phase,
        units=_sorted_units(units),
        dislodged=tuple(sorted(dislodged)),
        sc_ownership=dict(sorted((sc_ownership or {}).items())),
        standoffs=frozenset(standoffs),
    )


def initial_state(map: MapGraph) -> GameState:
    """Opening position: S1901M, 22 units, each power owns its home centers."""
    units = [Unit(kind, loc, power)
             for power, placements in map.start_units.items()
             for kind, loc in placements]
    ownership = {c: power for power, centers in map.home_centers.items()
                 for c in centers}
    return make_state(Phase(1901, SPRING, MOVEMENT), units, (), ownership, ())


def build_count(state: GameState, power: str, map: MapGraph) -> int:
    """Builds owed (+) or disbands owed (-); positive values are clamped by
    the number of free, owned, unoccupied home centers."""
    if state.phase.kind != ADJUSTMENT:
        raise PhaseError(f"build_count needs an adjustment phase, got {state.phase}")
    owned = len(state.owned_centers(power))
    units = len(state.units_of(power))
    diff = owned - units
    if diff > 0:
        return min(diff, len(open_build_sites(state, power, map)))
    return diff


def open_build_sites(state: GameState, power: str, map: MapGraph) -> tuple[str, ...]:
    """Owned, unoccupied home-center provinces of ``power``, sorted."""
    occupied = {map.province_of(u.loc) for u in state.units}
    return tuple(sorted(
        p for p in map.home_centers[power]
        if state.sc_ownership.get(p) == power and p not in occupied))


def units_requiring_orders(state: GameState, power: str, map: MapGraph) -> list[str]:
    """Locations the power must (or may) order this phase, sorted.

    Movement: every unit. Retreat: every dislodged unit. Adjustment: open
    build sites when builds are owed, all units when disbands are owed.
    """
    kind = state.phase.kind
    if kind == MOVEMENT:
        return sorted(u.loc for u in state.units_of(power))
    if kind == RETREAT:
        return sorted(d.unit.loc for d in state.dislodged if d.unit.power == power)
    count = build_count(state, power, map)
    if count > 0:
        return list(open_build_sites(state, power, map))
    if count < 0:
        return sorted(u.loc for u in state.units_of(power))
    return []


def update_ownership(state: GameState, map: MapGraph) -> GameState:
    """Transfer each supply center occupied by a foreign unit to the occupier;
    unoccupied centers keep their owner. Applied when entering Winter."""
    ownership = dict(state.sc_ownership)
    for u in state.units:
        p = map.province_of(u.loc)
        if p in map.supply_centers:
            ownership[p] = u.power
    return replace(state, sc_ownership=dict(sorted(ownership.items())))


# -- serialization -------------------------------------------------------------


def state_to_dict(state: GameState) -> dict:
    """Canonical JSON-ready form; key and list order is deterministic."""
    units: dict[str, list[str]] = {}
    for u in state.units:
        units.setdefault(u.power, []).append(u.text)
    dislodged: dict[str, list[list]] = {}
    for d in state.dislodged:
        dislodged.setdefault(d.unit.power, []).append(
            [d.unit.text, d.attacker_origin])
    centers: dict[str, list[str]] = {}
    for p, o in state.sc_ownership.items():
        centers.setdefault(o, []).append(p)
    return {
        "phase": state.phase.code,
        "units": {p: sorted(units[p]) for p in sorted(units)},
        "dislodged": {p: sorted(dislodged[p]) for p in sorted(dislodged)},
        "centers": {p: sorted(centers[p]) for p in sorted(centers)},
        "standoffs": sorted(state.standoffs),
    }


def _parse_unit(text: str, power: str) -> Unit:
    kind, _, loc = text.partition(" ")
    if kind not in (ARMY, FLEET) or not loc:
        raise StateError(f"bad unit text {text!r}")
    return Unit(kind, loc, power)


def state_from_dict(d: dict) -> GameState:
    units = [_parse_unit(t, power)
             for power, texts in d.get("units", {}).items() for t in texts]
    dislodged = [Dislodged(_parse_unit(t, power), origin)
                 for power, entries in d.get("dislodged", {}).items()
                 for t, origin in entries]
    ownership = {p: power
                 for power, provinces in d.get("centers", {}).items()
                 for p in provinces}
    return make_state(Phase.parse(d["phase"]), units, dislodged, ownership,
                      d.get("standoffs", ()))
