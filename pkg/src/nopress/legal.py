"""Legal-order generation and order validation.

``legal_orders`` produces the complete set of orders a location may
submit this phase; it defines both the bots' action spaces and the
decoder legality masks. ``validate`` applies *check* semantics: illegal
movement orders degrade to Hold, illegal retreat/adjustment orders are
dropped, duplicates lose to the first order for the same unit.

Convoy feasibility at generation time is based on fleet *presence*: a
convoyed move is offered when some chain of occupied water provinces
links source to destination. Whether the convoy actually works is the
adjudicator's business (matching orders, no dislodgement).
"""

from __future__ import annotations

from dataclasses import dataclass

from .map import ARMY, FLEET, MapGraph
from .orders import (Build, Convoy, Disband, Hold, Move, Order, Retreat,
                     SupportHold, SupportMove, UnitRef, Waive, WAIVE)
from .state import (ADJUSTMENT, MOVEMENT, RETREAT, GameState, Unit,
                    build_count, open_build_sites)


class LegalSet(frozenset):
    """Frozen set of orders; ``orderable`` is False when the location has
    no unit or build site to order this phase."""

    orderable: bool

    def __new__(cls, items=(), orderable=True):
        self = super().__new__(cls, items)
        self.orderable = orderable
        return self


_NOT_ORDERABLE = LegalSet((), orderable=False)


def unit_ref(unit: Unit) -> UnitRef:
    return UnitRef(unit.kind, unit.loc)


class _Ctx:
    """Per-(map, state) lookup tables shared across locations."""

    def __init__(self, map: MapGraph, state: GameState):
        self.map = map
        self.state = state
        self.by_loc: dict[str, Unit] = {u.loc: u for u in state.units}
        self.by_prov: dict[str, Unit] = {
            map.province_of(u.loc): u for u in state.units}
        # Connected components of fleet-occupied water provinces.
        fleet_waters = {map.province_of(u.loc) for u in state.units
                        if u.kind == FLEET} & map.water_provinces
        comp_of: dict[str, int] = {}
        comps: list[set[str]] = []
        for w in sorted(fleet_waters):
            if w in comp_of:
                continue
            comp = {w}
            frontier = [w]
            while frontier:
                x = frontier.pop()
                for y in map.water_water[x]:
                    if y in fleet_waters and y not in comp:
                        comp.add(y)
                        frontier.append(y)
            idx = len(comps)
            comps.append(comp)
            for x in comp:
                comp_of[x] = idx
        self.comp_of = comp_of
        self.comp_coasts: list[frozenset[str]] = [
            frozenset().union(*(map.water_coasts[w] for w in comp))
            for comp in comps]

    def entry_comps(self, province: str) -> set[int]:
        """Components of occupied waters an army at ``province`` can embark to."""
        return {self.comp_of[w]
                for w in self.map.coastal_waters.get(province, ())
                if w in self.comp_of}

    def convoy_dests(self, province: str) -> set[str]:
        dests: set[str] = set()
        for c in self.entry_comps(province):
            dests |= self.comp_coasts[c]
        dests.discard(province)
        return dests

    def reach_provinces(self, unit: Unit) -> set[str]:
        """Provinces the unit could move to directly (no convoy)."""
        if unit.kind == ARMY:
            return set(self.map.army.get(self.map.province_of(unit.loc), ()))
        return {self.map.province_of(d) for d in self.map.fleet.get(unit.loc, ())}

    def move_provinces(self, unit: Unit) -> set[str]:
        """Provinces the unit could attack, convoys included."""
        reach = self.reach_provinces(unit)
        if unit.kind == ARMY:
            reach |= self.convoy_dests(self.map.province_of(unit.loc))
        return reach


def _movement_orders(ctx: _Ctx, unit: Unit) -> set[Order]:
    map, ref = ctx.map, unit_ref(unit)
    orders: set[Order] = {Hold(ref)}
    for d in map.adjacent(unit.loc, unit.kind):
        orders.add(Move(ref, d, False))
    here = map.province_of(unit.loc)
    if unit.kind == ARMY:
        for d in ctx.convoy_dests(here):
            orders.add(Move(ref, d, True))
    reach = ctx.reach_provinces(unit)
    for other in ctx.state.units:
        if other is unit:
            continue
        their = map.province_of(other.loc)
        oref = unit_ref(other)
        if their in reach:
            orders.add(SupportHold(ref, oref))
        for p in reach & ctx.move_provinces(other):
            orders.add(SupportMove(ref, oref, p))
    if unit.kind == FLEET and here in map.water_provinces and here in ctx.comp_of:
        comp = ctx.comp_of[here]
        coasts = ctx.comp_coasts[comp]
        for other in ctx.state.units:
            if other.kind != ARMY:
                continue
            src = map.province_of(other.loc)
            if comp not in ctx.entry_comps(src):
                continue
            for dest in coasts:
                if dest != src:
                    orders.add(Convoy(ref, unit_ref(other), dest))
    return orders


def retreat_destinations(map: MapGraph, state: GameState, unit: Unit,
                         attacker_origin: str | None) -> set[str]:
    """Locations the dislodged unit may retreat to: adjacent, unoccupied,
    not a standoff province, not the dislodger's origin (land attacks only)."""
    occupied = {map.province_of(u.loc) for u in state.units}
    banned = set(state.standoffs) | occupied
    if attacker_origin is not None:
        banned.add(map.province_of(attacker_origin))
    return {d for d in map.adjacent(unit.loc, unit.kind)
            if map.province_of(d) not in banned}


def _retreat_orders(ctx: _Ctx, unit: Unit, origin: str | None) -> set[Order]:
    ref = unit_ref(unit)
    orders: set[Order] = {Disband(ref)}
    for d in retreat_destinations(ctx.map, ctx.state, unit, origin):
        orders.add(Retreat(ref, d))
    return orders


def _build_orders(map: MapGraph, province: str) -> set[Order]:
    orders: set[Order] = {Build(ARMY, province), WAIVE}
    loc = map.locations[province]
    if loc.kind == "coastal":
        if province in map.split_provinces:
            orders |= {Build(FLEET, c) for c in map.fleet_positions(province)}
        else:
            orders.add(Build(FLEET, province))
    return orders


def legal_orders(map: MapGraph, state: GameState, loc: str,
                 ctx: "_Ctx | None" = None) -> LegalSet:
    """All orders the unit (or build site) at ``loc`` may submit this phase.

    Returns a non-orderable empty set when nothing at ``loc`` can be
    ordered; that is not an error.
    """
    ctx = ctx or _Ctx(map, state)
    kind = state.phase.kind
    if kind == MOVEMENT:
        unit = ctx.by_loc.get(loc)
        if unit is None:
            return _NOT_ORDERABLE
        return LegalSet(_movement_orders(ctx, unit))
    if kind == RETREAT:
        for d in state.dislodged:
            if d.unit.loc == loc:
                return LegalSet(_retreat_orders(ctx, d.unit, d.attacker_origin))
        return _NOT_ORDERABLE
    # adjustment
    for power in sorted({u.power for u in state.units} | set(map.home_centers)):
        count = build_count(state, power, map)
        if count > 0 and loc in open_build_sites(state, power, map):
            return LegalSet(_build_orders(map, loc))
        if count < 0:
            unit = ctx.by_loc.get(loc)
            if unit is not None and unit.power == power:
                return LegalSet({Disband(unit_ref(unit)), WAIVE})
    return _NOT_ORDERABLE


def all_legal_orders(map: MapGraph, state: GameState,
                     power: str | None = None) -> dict[str, LegalSet]:
    """Legal sets for every orderable location (of ``power``, or everyone).

    Shares one context across locations; prefer this over repeated
    ``legal_orders`` calls when covering a whole phase.
    """
    from .state import units_requiring_orders
    ctx = _Ctx(map, state)
    powers = [power] if power else sorted({u.power for u in state.units}
                                          | set(map.home_centers))
    out: dict[str, LegalSet] = {}
    for p in powers:
        for loc in units_requiring_orders(state, p, map):
            out[loc] = legal_orders(map, state, loc, ctx)
    return out


# -- validation ----------------------------------------------------------------


@dataclass(frozen=True)
class Judgment:
    """Outcome of validating one submitted order."""

    order: Order
    valid: bool
    reason: str | None = None
    #: order that actually enters resolution: the order itself, a Hold
    #: substitute (movement), a canonicalized form, or None (dropped)
    effective: Order | None = None


def _judge(order, valid, reason=None, effective=None) -> Judgment:
    if valid and effective is None:
        effective = order
    return Judgment(order, valid, reason, effective)


def validate(map: MapGraph, state: GameState, power: str,
             orders: list[Order], ctx: "_Ctx | None" = None) -> list[Judgment]:
    """Judge each order under *check* semantics.

    An order is valid iff it is in ``legal_orders`` of its location and
    the acting unit belongs to ``power``. Invalid movement orders for an
    existing own unit degrade to Hold; invalid retreat/adjustment orders
    are dropped. The second order for one unit is a duplicate.
    """
    ctx = ctx or _Ctx(map, state)
    kind = state.phase.kind
    judgments: list[Judgment] = []
    seen: set[str] = set()

    for order in orders:
        if isinstance(order, Waive):
            if kind == ADJUSTMENT:
                judgments.append(_judge(order, True))
            else:
                judgments.append(_judge(order, False, "wrong_phase"))
            continue

        if isinstance(order, Build):
            loc = order.loc
            site = map.province_of(loc)
            if kind != ADJUSTMENT:
                judgments.append(_judge(order, False, "wrong_phase"))
                continue
            if site in seen:
                judgments.append(_judge(order, False, "duplicate"))
                continue
            seen.add(site)
            if build_count(state, power, map) <= 0:
                judgments.append(_judge(order, False, "no_builds_owed"))
            elif site not in open_build_sites(state, power, map):
                occupied = {map.province_of(u.loc) for u in state.units}
                reason = "occupied" if site in occupied else "not_open_home_center"
                judgments.append(_judge(order, False, reason))
            elif order not in _build_orders(map, site) or (
                    loc != site and loc not in map.fleet_positions(site)):
                judgments.append(_judge(order, False, "bad_terrain"))
            else:
                judgments.append(_judge(order, True))
            continue

        # unit-acting orders
        actual = ctx.by_loc.get(order.unit.loc)
        if kind == RETREAT:
            actual = next((d.unit for d in state.dislodged
                           if d.unit.loc == order.unit.loc), None)
        if actual is None or actual.kind != order.unit.kind:
            judgments.append(_judge(order, False, "no_such_unit"))
            continue
        if actual.power != power:
            judgments.append(_judge(order, False, "foreign_unit"))
            continue
        if order.unit.loc in seen:
            judgments.append(_judge(order, False, "duplicate"))
            continue
        seen.add(order.unit.loc)

        legal = legal_orders(map, state, order.unit.loc, ctx)
        if order in legal:
            judgments.append(_judge(order, True))
            continue
        if (kind == MOVEMENT and isinstance(order, Move) and not order.via_convoy
                and Move(order.unit, order.dest, True) in legal):
            # bare text for a convoy-only move: canonicalize to the VIA form
            judgments.append(_judge(order, True, "canonicalized_via",
                                    Move(order.unit, order.dest, True)))
            continue
        reason = _diagnose(ctx, order, legal)
        if kind == MOVEMENT:
            judgments.append(Judgment(order, False, reason, Hold(order.unit)))
        else:
            judgments.append(_judge(order, False, reason))
    return judgments


def _diagnose(ctx: _Ctx, order: Order, legal: LegalSet) -> str:
    """Best-effort reason an order failed validation."""
    if isinstance(order, (Hold, Move, SupportHold, SupportMove, Convoy)):
        if ctx.state.phase.kind != MOVEMENT:
            return "wrong_phase"
    if isinstance(order, (Retreat, Disband)) and ctx.state.phase.kind == MOVEMENT:
        return "wrong_phase"
    if isinstance(order, Move):
        return "unreachable_destination"
    if isinstance(order, SupportHold):
        return ("no_supported_unit"
                if unit_exists(ctx, order.target) is None else "unreachable_support")
    if isinstance(order, SupportMove):
        if unit_exists(ctx, order.moving) is None:
            return "no_supported_unit"
        return "unreachable_destination"
    if isinstance(order, Convoy):
        return "no_convoy_route"
    if isinstance(order, Retreat):
        return "illegal_retreat"
    return "illegal"


def unit_exists(ctx: _Ctx, ref: UnitRef) -> Unit | None:
    u = ctx.by_loc.get(ref.loc)
    return u if u is not None and u.kind == ref.kind else None
