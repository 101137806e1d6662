"""Deterministic simultaneous-order resolution.

Movement resolution follows full rulebook semantics:

* strength = 1 + valid supports; equal strengths bounce;
* support is cut by a foreign attack from any province except the one
  the support is directed into, and is void if the supporter is
  dislodged; a convoyed attack only cuts while its path is intact;
* a power can neither dislodge its own units (and foreign attacks on a
  unit get no help from supports issued by the defender's power) nor
  cut its own supports;
* convoyed moves require a complete path of non-dislodged convoying
  fleets with matching orders; head-to-head battles only arise between
  two overland moves;
* circular movements rotate; convoy dependency cycles with no (or no
  unique) consistent outcome fail the convoyed moves in the cycle.

The resolver is a dependency-driven fixed point: each order is resolved
recursively under a trial guess, dependency cycles are detected and
re-tried with the opposite guess, and surviving ambiguity is settled by
the backup rule above. Results never depend on order-list order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ContractViolation, PhaseError
from .map import ARMY, FLEET, MapGraph
from .orders import (Build, Convoy, Disband, Hold, Move, Order, Retreat,
                     SupportHold, SupportMove, Waive, acting_loc)
from .state import (ADJUSTMENT, FALL, MOVEMENT, RETREAT, SPRING, WINTER,
                    Dislodged, GameState, Phase, Unit, build_count,
                    make_state, open_build_sites, update_ownership)

OK = "ok"


@dataclass(frozen=True)
class Verdict:
    success: bool
    reason: str | None = None

    @property
    def text(self) -> str:
        return OK if self.success else f"fail:{self.reason}"


_OK = Verdict(True)


@dataclass(frozen=True)
class Resolution:
    """Outcome of resolving one phase's orders."""

    verdicts: dict[Order, Verdict]
    dislodgements: tuple[Dislodged, ...]
    standoffs: frozenset[str]
    #: surviving units mapped to their post-phase locations
    resulting_positions: dict[Unit, str]


_UNRESOLVED, _GUESSING, _RESOLVED = 0, 1, 2


class _Mover:
    """Movement-phase resolution engine over indexed orders."""

    def __init__(self, map: MapGraph, state: GameState,
                 orders: list[tuple[Unit, Order]]):
        self.map = map
        self.state = state
        self.units = [u for u, _ in orders]
        self.orders = [o for _, o in orders]
        n = len(orders)
        self.n = n
        prov = map.province_of
        self.prov = [prov(u.loc) for u in self.units]
        self.occupant: dict[str, int] = {self.prov[i]: i for i in range(n)}

        self.is_move = [isinstance(o, Move) for o in self.orders]
        self.dest_loc = [o.dest if isinstance(o, Move) else None for o in self.orders]
        self.dest = [prov(o.dest) if isinstance(o, Move) else None for o in self.orders]
        self.via = [isinstance(o, Move) and o.via_convoy for o in self.orders]

        self.moves_into: dict[str, list[int]] = {}
        for i in range(n):
            if self.is_move[i]:
                self.moves_into.setdefault(self.dest[i], []).append(i)

        # matched supports per move / per holding unit
        self.sup_move: dict[int, list[int]] = {i: [] for i in range(n)}
        self.sup_hold: dict[int, list[int]] = {i: [] for i in range(n)}
        by_loc = {u.loc: i for i, u in enumerate(self.units)}
        self.matched: dict[int, bool] = {}
        for s, o in enumerate(self.orders):
            if isinstance(o, SupportMove):
                t = by_loc.get(o.moving.loc)
                ok = (t is not None and self.units[t].kind == o.moving.kind
                      and self.is_move[t] and self.dest[t] == o.dest)
                self.matched[s] = ok
                if ok:
                    self.sup_move[t].append(s)
            elif isinstance(o, SupportHold):
                t = by_loc.get(o.target.loc)
                ok = (t is not None and self.units[t].kind == o.target.kind
                      and not self.is_move[t])
                self.matched[s] = ok
                if ok:
                    self.sup_hold[t].append(s)

        # convoy orders keyed by the convoyed army's location
        self.convoys: dict[int, bool] = {}      # convoy idx -> matched
        self.convoy_fleets: dict[int, dict[str, int]] = {}  # move idx -> water prov -> convoy idx
        for c, o in enumerate(self.orders):
            if not isinstance(o, Convoy):
                continue
            w = self.prov[c]
            ok = False
            if self.units[c].kind == FLEET and w in map.water_provinces:
                t = by_loc.get(o.moving.loc)
                if (t is not None and self.units[t].kind == ARMY == o.moving.kind
                        and self.via[t] and self.dest[t] == o.dest):
                    ok = True
                    self.convoy_fleets.setdefault(t, {})[w] = c
            self.convoys[c] = ok

        # head-to-head: two overland moves targeting each other
        self.h2h: list[int | None] = [None] * n
        for i in range(n):
            if not self.is_move[i] or self.via[i]:
                continue
            j = self.occupant.get(self.dest[i])
            if (j is not None and self.is_move[j] and not self.via[j]
                    and self.dest[j] == self.prov[i]):
                self.h2h[i] = j

        self.status = [_UNRESOLVED] * n
        self.result = [False] * n
        self.dep: list[int] = []

    # -- fixed-point machinery ------------------------------------------------

    def resolve(self, i: int) -> bool:
        st = self.status[i]
        if st == _RESOLVED:
            return self.result[i]
        if st == _GUESSING:
            if i not in self.dep:
                self.dep.append(i)
            return self.result[i]
        base = len(self.dep)
        self.status[i] = _GUESSING
        self.result[i] = False
        first = self._adjudicate(i)
        if len(self.dep) == base:
            if self.status[i] != _RESOLVED:
                self.result[i] = first
                self.status[i] = _RESOLVED
            return first
        if self.dep[base] != i:
            # inside someone else's cycle: stay guessed, let the root retry
            self.dep.append(i)
            self.result[i] = first
            return first
        # i roots the cycle: try the opposite guess
        for j in self.dep[base:]:
            self.status[j] = _UNRESOLVED
        del self.dep[base:]
        self.status[i] = _GUESSING
        self.result[i] = True
        second = self._adjudicate(i)
        if first == second:
            for j in self.dep[base:]:
                self.status[j] = _UNRESOLVED
            del self.dep[base:]
            self.result[i] = first
            self.status[i] = _RESOLVED
            return first
        members = self.dep[base:] + [i]
        for j in self.dep[base:]:
            self.status[j] = _UNRESOLVED
        del self.dep[base:]
        self.status[i] = _UNRESOLVED
        self._backup_rule(members)
        return self.resolve(i)

    def _backup_rule(self, members: list[int]) -> None:
        """Settle an ambiguous dependency cycle.

        A cycle of moves only is a circular movement (convoyed swaps
        included): every move in it succeeds. A cycle that runs through
        supports is convoy disruption: the convoyed moves in it fail;
        when the convoyed move is already settled and only the
        support/attack ambiguity is left, the attacks succeed (the
        convoying fleet is dislodged, the support holds).
        """
        members = list(dict.fromkeys(members))
        moves = [j for j in members if self.is_move[j]]
        pure_move_cycle = len(moves) == len(members)
        vias = [j for j in moves if self.via[j]]
        if pure_move_cycle or not vias:
            for j in moves:
                self.result[j] = True
                self.status[j] = _RESOLVED
        else:
            for j in vias:
                self.result[j] = False
                self.status[j] = _RESOLVED

    # -- rule evaluation --------------------------------------------------------

    def _path_ok(self, i: int) -> bool:
        """Convoyed move has a complete chain of non-dislodged matching fleets.

        Dislodgement is only checked for fleets actually reached by the
        search, so unrelated convoy orders never create dependencies.
        """
        fleets = self.convoy_fleets.get(i)
        if not fleets:
            return False
        src, goal = self.prov[i], self.dest[i]
        frontier = [w for w in self.map.coastal_waters.get(src, ()) if w in fleets]
        seen = set(frontier)
        while frontier:
            w = frontier.pop()
            if self._dislodged(w):
                continue
            if goal in self.map.water_coasts[w]:
                return True
            for x in self.map.water_water[w]:
                if x in fleets and x not in seen:
                    seen.add(x)
                    frontier.append(x)
        return False

    def _dislodged(self, province: str) -> bool:
        occ = self.occupant.get(province)
        if occ is None:
            return False
        if self.is_move[occ] and self.resolve(occ):
            return False  # vacated (a head-to-head winner vacates too)
        return any(self.resolve(m) for m in self.moves_into.get(province, ())
                   if m != occ)

    def _support_given(self, s: int) -> bool:
        sp = self.prov[s]
        o = self.orders[s]
        directed = o.dest if isinstance(o, SupportMove) else \
            self.map.province_of(o.target.loc)
        for m in self.moves_into.get(sp, ()):
            if self.units[m].power == self.units[s].power:
                continue
            if self.prov[m] == directed:
                continue
            if not self.via[m] or self._path_ok(m):
                return False  # cut
        return not any(self.resolve(m) for m in self.moves_into.get(sp, ()))

    def _hold_strength(self, province: str) -> int:
        occ = self.occupant.get(province)
        if occ is None:
            return 0
        if self.is_move[occ]:
            return 0 if self.resolve(occ) else 1
        return 1 + sum(self.resolve(s) for s in self.sup_hold[occ])

    def _prevent(self, i: int) -> int:
        if self.via[i] and not self._path_ok(i):
            return 0
        j = self.h2h[i]
        if j is not None and self.resolve(j):
            return 0
        return 1 + sum(self.resolve(s) for s in self.sup_move[i])

    def _adjudicate(self, i: int) -> bool:
        if not self.is_move[i]:
            return self._support_given(i)
        if self.via[i] and not self._path_ok(i):
            return False
        dest = self.dest[i]
        occ = self.occupant.get(dest)
        if occ is None:
            vacated = True
        elif self.h2h[i] == occ:
            vacated = False  # head-to-head: fight it out, never a vacancy
        else:
            vacated = self.is_move[occ] and self.resolve(occ)
        if not vacated:
            defender = self.units[occ].power
            if defender == self.units[i].power:
                return False
            attack = 1 + sum(self.resolve(s) for s in self.sup_move[i]
                             if self.units[s].power != defender)
            if self.h2h[i] is not None:
                against = 1 + sum(self.resolve(s) for s in self.sup_move[occ])
            else:
                against = self._hold_strength(dest)
        else:
            attack = 1 + sum(self.resolve(s) for s in self.sup_move[i])
            against = 0
        if attack <= against:
            return False
        return all(attack > self._prevent(m)
                   for m in self.moves_into[dest] if m != i)

    # -- final assembly -----------------------------------------------------------

    def run(self) -> Resolution:
        for i in range(self.n):
            if self.is_move[i] or isinstance(self.orders[i], (SupportMove, SupportHold)):
                self.resolve(i)

        dislodged_provs: dict[str, int] = {}   # province -> winning move idx
        for i in range(self.n):
            if self.is_move[i] and self.result[i]:
                occ = self.occupant.get(self.dest[i])
                if occ is not None and not (self.is_move[occ] and self.result[occ]):
                    dislodged_provs[self.dest[i]] = i

        verdicts: dict[Order, Verdict] = {}
        positions: dict[Unit, str] = {}
        dislodgements: list[Dislodged] = []
        for i, (u, o) in enumerate(zip(self.units, self.orders)):
            here = self.prov[i]
            moved = self.is_move[i] and self.result[i]
            if self.is_move[i]:
                if moved:
                    verdicts[o] = _OK
                elif self.via[i] and not self._path_ok(i):
                    verdicts[o] = Verdict(False, "no_convoy")
                else:
                    verdicts[o] = Verdict(False, "bounce")
            elif isinstance(o, (SupportMove, SupportHold)):
                if not self.matched.get(i, False):
                    verdicts[o] = Verdict(False, "void")
                elif self.result[i]:
                    verdicts[o] = _OK
                elif here in dislodged_provs:
                    verdicts[o] = Verdict(False, "dislodged")
                else:
                    verdicts[o] = Verdict(False, "cut")
            elif isinstance(o, Convoy):
                t = next((t for t, fleets in self.convoy_fleets.items()
                          if here in fleets), None) if self.convoys[i] else None
                if not self.convoys[i]:
                    verdicts[o] = Verdict(False, "void")
                elif here in dislodged_provs:
                    verdicts[o] = Verdict(False, "dislodged")
                elif t is not None and not self._path_ok(t):
                    verdicts[o] = Verdict(False, "disrupted")
                else:
                    verdicts[o] = _OK
            else:  # Hold
                verdicts[o] = (Verdict(False, "dislodged")
                               if here in dislodged_provs else _OK)

            if moved:
                positions[u] = self.dest_loc[i]
            elif here in dislodged_provs:
                winner = dislodged_provs[here]
                origin = None if self.via[winner] else self.prov[winner]
                dislodgements.append(Dislodged(u, origin))
            else:
                positions[u] = u.loc

        ends_at = {self.map.province_of(loc) for loc in positions.values()}
        standoffs = frozenset(
            p for p, ms in self.moves_into.items()
            if p not in ends_at
            and any(not self.result[m]
                    and (not self.via[m] or self._path_ok(m)) for m in ms))
        return Resolution(verdicts, tuple(sorted(dislodgements)), standoffs,
                          positions)


def _paired_orders(map: MapGraph, state: GameState,
                   orders_by_power: dict[str, list[Order]]) -> list[tuple[Unit, Order]]:
    """Pair every unit with exactly one of its validated orders."""
    by_loc = {u.loc: u for u in state.units}
    paired: dict[str, tuple[Unit, Order]] = {}
    for power, orders in orders_by_power.items():
        for o in orders:
            if isinstance(o, Waive):
                continue
            loc = acting_loc(o)
            u = by_loc.get(loc)
            if u is None or u.power != power or u.kind != o.unit.kind:
                raise ContractViolation(
                    f"unvalidated order {o!r} for {power}: no matching unit")
            if loc in paired:
                raise ContractViolation(f"two orders for unit at {loc}")
            paired[loc] = (u, o)
    for u in state.units:
        if u.loc not in paired:
            raise ContractViolation(f"unit {u.text} has no order")
    return [paired[u.loc] for u in state.units]


def resolve_movement(map: MapGraph, state: GameState,
                     orders_by_power: dict[str, list[Order]]) -> Resolution:
    """Resolve one movement phase. Orders must be validated and complete
    (unordered units already defaulted to Hold)."""
    if state.phase.kind != MOVEMENT:
        raise PhaseError(f"resolve_movement in {state.phase}")
    return _Mover(map, state, _paired_orders(map, state, orders_by_power)).run()


def counterfactual_without(map: MapGraph, state: GameState,
                           orders_by_power: dict[str, list[Order]],
                           dropped: Order) -> Resolution:
    """Re-resolve the phase with ``dropped`` replaced by a Hold for its unit."""
    found = False
    rewritten: dict[str, list[Order]] = {}
    for power, orders in orders_by_power.items():
        out = []
        for o in orders:
            if o == dropped and not found:
                found = True
                o = Hold(dropped.unit)
            out.append(o)
        rewritten[power] = out
    if not found:
        raise ValueError(f"dropped order {dropped!r} not among the submitted orders")
    return resolve_movement(map, state, rewritten)


def resolve_retreats(map: MapGraph, state: GameState,
                     orders_by_power: dict[str, list[Order]]) -> Resolution:
    """Retreats to distinct legal destinations succeed; collisions disband
    both; dislodged units without a (valid) order disband."""
    if state.phase.kind != RETREAT:
        raise PhaseError(f"resolve_retreats in {state.phase}")
    dislodged = {d.unit.loc: d.unit for d in state.dislodged}
    chosen: dict[str, Order] = {}
    for power, orders in orders_by_power.items():
        for o in orders:
            if isinstance(o, Waive):
                continue
            if not isinstance(o, (Retreat, Disband)):
                raise ContractViolation(f"{o!r} is not a retreat-phase order")
            u = dislodged.get(o.unit.loc)
            if u is None or u.power != power or u.kind != o.unit.kind:
                raise ContractViolation(f"unvalidated retreat order {o!r}")
            if o.unit.loc in chosen:
                raise ContractViolation(f"two retreat orders for {o.unit.loc}")
            chosen[o.unit.loc] = o

    by_dest: dict[str, list[str]] = {}
    for loc, o in chosen.items():
        if isinstance(o, Retreat):
            by_dest.setdefault(map.province_of(o.dest), []).append(loc)

    verdicts: dict[Order, Verdict] = {}
    positions: dict[Unit, str] = {u: u.loc for u in state.units}
    for loc, unit in dislodged.items():
        o = chosen.get(loc)
        if o is None:
            continue
        if isinstance(o, Disband):
            verdicts[o] = _OK
        elif len(by_dest[map.province_of(o.dest)]) > 1:
            verdicts[o] = Verdict(False, "collision")
        else:
            verdicts[o] = _OK
            positions[unit] = o.dest
    return Resolution(verdicts, (), frozenset(), positions)


def farthest_from_home(map: MapGraph, state: GameState, power: str,
                       units: list[Unit], count: int) -> list[Unit]:
    """Civil-disorder disband pick: the ``count`` units farthest (union-graph
    distance) from the power's owned home centers (any home center when none
    is owned), ties broken alphabetically by location."""
    homes = [h for h in map.home_centers[power]
             if state.sc_ownership.get(h) == power] or sorted(map.home_centers[power])
    dist = map.distances("union")

    def remoteness(u: Unit) -> int:
        return min(dist[map.province_of(u.loc)].get(h, 99) for h in homes)

    ranked = sorted(units, key=lambda u: (-remoteness(u), u.loc))
    return ranked[:count]


def resolve_adjustments(map: MapGraph, state: GameState,
                        orders_by_power: dict[str, list[Order]]) -> Resolution:
    """Place builds, execute disbands, auto-complete missing disbands, and
    treat unused builds as waived."""
    if state.phase.kind != ADJUSTMENT:
        raise PhaseError(f"resolve_adjustments in {state.phase}")
    verdicts: dict[Order, Verdict] = {}
    positions: dict[Unit, str] = {u: u.loc for u in state.units}
    by_loc = {u.loc: u for u in state.units}

    for power in sorted(set(orders_by_power) | set(map.home_centers)):
        count = build_count(state, power, map)
        orders = orders_by_power.get(power, [])
        budget = count
        disbanded: list[Unit] = []
        for o in orders:
            if isinstance(o, Waive):
                verdicts[o] = _OK
                if budget > 0:
                    budget -= 1
            elif isinstance(o, Build):
                if count <= 0 or budget <= 0:
                    verdicts[o] = Verdict(False, "no_builds_left")
                    continue
                site = map.province_of(o.loc)
                if site not in open_build_sites(state, power, map):
                    raise ContractViolation(f"unvalidated build {o!r}")
                budget -= 1
                verdicts[o] = _OK
                positions[Unit(o.kind, o.loc, power)] = o.loc
            elif isinstance(o, Disband):
                u = by_loc.get(o.unit.loc)
                if u is None or u.power != power or u.kind != o.unit.kind:
                    raise ContractViolation(f"unvalidated disband {o!r}")
                if count >= 0 or len(disbanded) >= -count:
                    verdicts[o] = Verdict(False, "no_disbands_owed")
                    continue
                verdicts[o] = _OK
                disbanded.append(u)
                del positions[u]
            else:
                raise ContractViolation(f"{o!r} is not an adjustment-phase order")
        if count < 0 and len(disbanded) < -count:
            remaining = [u for u in state.units_of(power) if u not in disbanded]
            for u in farthest_from_home(map, state, power, remaining,
                                        -count - len(disbanded)):
                del positions[u]
    return Resolution(verdicts, (), frozenset(), positions)


def apply(state: GameState, resolution: Resolution, map: MapGraph) -> GameState:
    """Install a resolution and advance the phase calendar.

    Retreat phases are skipped when nothing was dislodged; Winter is
    skipped when no power owes builds or disbands. Supply-center
    ownership updates when Fall business finishes, before the Winter
    decision is made.
    """
    phase = state.phase
    units = [replace(u, loc=loc) if u.loc != loc else u
             for u, loc in resolution.resulting_positions.items()]

    if phase.kind == MOVEMENT:
        nxt = make_state(phase, units, resolution.dislodgements,
                         state.sc_ownership, resolution.standoffs)
        if resolution.dislodgements:
            return replace(nxt, phase=Phase(phase.year, phase.season, RETREAT))
        return _after_season(nxt, map)
    if phase.kind == RETREAT:
        nxt = make_state(phase, units, (), state.sc_ownership, state.standoffs)
        return _after_season(nxt, map)
    # adjustment
    nxt = make_state(phase, units, (), state.sc_ownership, state.standoffs)
    return replace(nxt, phase=Phase(phase.year + 1, SPRING, MOVEMENT))


def _after_season(state: GameState, map: MapGraph) -> GameState:
    phase = state.phase
    if phase.season == SPRING:
        return replace(state, phase=Phase(phase.year, FALL, MOVEMENT))
    state = update_ownership(state, map)
    winter = replace(state, phase=Phase(phase.year, WINTER, ADJUSTMENT))
    powers = set(map.home_centers)
    if any(build_count(winter, p, map) != 0 for p in powers):
        return winter
    return replace(winter, phase=Phase(phase.year + 1, SPRING, MOVEMENT))
