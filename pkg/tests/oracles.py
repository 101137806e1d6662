"""Independent oracles backing the property tests.

``oracle_resolve`` is an exhaustive fixed-point adjudicator: it
enumerates every success/failure assignment over the move orders,
derives all secondary facts (dislodgements, convoy paths, support cuts)
from each assignment, and keeps the assignments consistent with the
rulebook constraints. Ambiguity is settled the same way the engine
pins it: pure move cycles rotate (pointwise-max assignment); convoy
paradoxes fail the convoyed moves in the undetermined core, found by
three-valued constraint propagation.

``enumerate_legal`` is a brute-force legality oracle: it generates every
syntactically well-formed order for a location and filters by directly
coded rule predicates.

Everything here is written against the rulebook, not against the
engine's resolver; only the immutable MapGraph tables are shared.
"""

from __future__ import annotations

import itertools

from nopress.map import ARMY, FLEET, MapGraph
from nopress.orders import (Build, Convoy, Disband, Hold, Move, Order,
                            Retreat, SupportHold, SupportMove, UnitRef, WAIVE)
from nopress.state import (ADJUSTMENT, MOVEMENT, RETREAT, GameState, Unit,
                           build_count, open_build_sites)

T, F, U = True, False, None  # three-valued logic; U = undetermined


class _Board:
    """Static order indexing shared by the assignment checker."""

    def __init__(self, map: MapGraph, pairs: list[tuple[Unit, Order]]):
        self.map = map
        self.units = [u for u, _ in pairs]
        self.orders = [o for _, o in pairs]
        n = len(pairs)
        self.n = n
        self.prov = [map.province_of(u.loc) for u in self.units]
        self.power = [u.power for u in self.units]
        self.occupant = {self.prov[i]: i for i in range(n)}
        by_loc = {u.loc: i for i, u in enumerate(self.units)}

        self.moves = [i for i in range(n) if isinstance(self.orders[i], Move)]
        self.dest = {i: map.province_of(self.orders[i].dest) for i in self.moves}
        self.via = {i: self.orders[i].via_convoy for i in self.moves}
        self.moves_into: dict[str, list[int]] = {}
        for i in self.moves:
            self.moves_into.setdefault(self.dest[i], []).append(i)

        self.sup_move: dict[int, list[int]] = {i: [] for i in range(n)}
        self.sup_hold: dict[int, list[int]] = {i: [] for i in range(n)}
        self.matched: dict[int, bool] = {}
        for s, o in enumerate(self.orders):
            if isinstance(o, SupportMove):
                t = by_loc.get(o.moving.loc)
                ok = (t is not None and self.units[t].kind == o.moving.kind
                      and t in self.dest and self.dest[t] == o.dest)
                self.matched[s] = ok
                if ok:
                    self.sup_move[t].append(s)
            elif isinstance(o, SupportHold):
                t = by_loc.get(o.target.loc)
                ok = (t is not None and self.units[t].kind == o.target.kind
                      and t not in self.dest)
                self.matched[s] = ok
                if ok:
                    self.sup_hold[t].append(s)

        # water province -> set of move idx it has a matching convoy order for
        self.fleet_for: dict[int, set[str]] = {i: set() for i in self.moves}
        for c, o in enumerate(self.orders):
            if not isinstance(o, Convoy):
                continue
            w = self.prov[c]
            if self.units[c].kind != FLEET or w not in map.water_provinces:
                continue
            t = by_loc.get(o.moving.loc)
            if (t is not None and self.units[t].kind == ARMY == o.moving.kind
                    and t in self.via and self.via[t] and self.dest[t] == o.dest):
                self.fleet_for[t].add(w)

        self.h2h: dict[int, int | None] = {}
        for i in self.moves:
            j = self.occupant.get(self.dest[i])
            self.h2h[i] = j if (j in self.dest and not self.via.get(i)
                                and not self.via.get(j)
                                and self.dest.get(j) == self.prov[i]) else None


class _Facts:
    """All secondary facts derived from one success/failure assignment."""

    def __init__(self, b: _Board, sigma: dict[int, bool]):
        self.b = b
        self.sigma = sigma
        self.dislodged_prov: set[str] = set()
        for p, occ in b.occupant.items():
            vacated = sigma.get(occ, False)
            if not vacated and any(sigma[m] for m in b.moves_into.get(p, ())
                                   if m != occ):
                self.dislodged_prov.add(p)

    def path_ok(self, i: int) -> bool:
        b = self.b
        usable = {w for w in b.fleet_for[i] if w not in self.dislodged_prov}
        src, goal = b.prov[i], b.dest[i]
        frontier = [w for w in b.map.coastal_waters.get(src, ()) if w in usable]
        seen = set(frontier)
        while frontier:
            w = frontier.pop()
            if goal in b.map.water_coasts[w]:
                return True
            for x in b.map.water_water[w]:
                if x in usable and x not in seen:
                    seen.add(x)
                    frontier.append(x)
        return False

    def given(self, s: int) -> bool:
        """Support is neither cut nor voided by dislodgement."""
        b = self.b
        sp = b.prov[s]
        o = b.orders[s]
        directed = (o.dest if isinstance(o, SupportMove)
                    else b.map.province_of(o.target.loc))
        for m in b.moves_into.get(sp, ()):
            if b.power[m] == b.power[s]:
                continue
            if b.prov[m] == directed:
                continue
            if b.via.get(m) and not self.path_ok(m):
                continue
            return False
        return sp not in self.dislodged_prov

    def implied(self, i: int) -> bool:
        """Success the rules dictate for move ``i`` under this assignment."""
        b, sigma = self.b, self.sigma
        if b.via[i] and not self.path_ok(i):
            return False
        dest = b.dest[i]
        occ = b.occupant.get(dest)
        h2 = b.h2h[i]
        if occ is None or (occ != h2 and occ in b.dest and sigma[occ]):
            attack = 1 + sum(self.given(s) for s in b.sup_move[i])
            against = 0
        else:
            defender = b.power[occ]
            if defender == b.power[i]:
                return False
            attack = 1 + sum(self.given(s) for s in b.sup_move[i]
                             if b.power[s] != defender)
            if occ == h2:
                against = 1 + sum(self.given(s) for s in b.sup_move[occ])
            elif occ in b.dest:
                against = 1
            else:
                against = 1 + sum(self.given(s) for s in b.sup_hold[occ])
        if attack <= against:
            return False
        for m in b.moves_into[dest]:
            if m == i:
                continue
            if b.via.get(m) and not self.path_ok(m):
                continue
            if b.h2h[m] is not None and sigma[b.h2h[m]]:
                continue
            if attack <= 1 + sum(self.given(s) for s in b.sup_move[m]):
                return False
        return True


def _consistent(b: _Board, forced: dict[int, bool]) -> list[dict[int, bool]]:
    free = [i for i in b.moves if i not in forced]
    out = []
    for bits in itertools.product((False, True), repeat=len(free)):
        sigma = dict(forced)
        sigma.update(zip(free, bits))
        f = _Facts(b, sigma)
        if all(f.implied(i) == sigma[i] for i in free):
            out.append(sigma)
    return out


# -- three-valued propagation to find the undetermined core --------------------


def _propagate(b: _Board, forced: dict[int, bool]) -> dict[int, bool | None]:
    """Kleene fixed point: move values derivable regardless of the cycle."""
    vals: dict[int, bool | None] = {i: U for i in b.moves}
    vals.update(forced)

    def tri_path(i):
        # reachability through fleets whose survival is certain / possible
        sure, maybe = set(), set()
        for w in b.fleet_for[i]:
            d = tri_dislodged(w)
            if d is F:
                sure.add(w)
            elif d is U:
                maybe.add(w)
        if _reach(b, i, sure):
            return T
        if not _reach(b, i, sure | maybe):
            return F
        return U

    def tri_dislodged(p):
        occ = b.occupant.get(p)
        if occ is None:
            return F
        vac = vals.get(occ, F) if occ in b.dest else F
        att = [vals[m] for m in b.moves_into.get(p, ()) if m != occ]
        some_in = T if any(a is T for a in att) else (U if any(a is U for a in att) else F)
        if vac is T or some_in is F:
            return F
        if vac is F and some_in is T:
            return T
        return U

    def tri_given(s):
        sp = b.prov[s]
        o = b.orders[s]
        directed = (o.dest if isinstance(o, SupportMove)
                    else b.map.province_of(o.target.loc))
        cut = F
        for m in b.moves_into.get(sp, ()):
            if b.power[m] == b.power[s] or b.prov[m] == directed:
                continue
            arrives = tri_path(m) if b.via.get(m) else T
            if arrives is T:
                return F  # definitely cut
            if arrives is U:
                cut = U
        d = tri_dislodged(sp)
        if cut is F and d is F:
            return T
        if d is T:
            return F
        return U

    def strength(base, sups):
        lo = base + sum(1 for s in sups if tri_given(s) is T)
        hi = base + sum(1 for s in sups if tri_given(s) is not F)
        return lo, hi

    def tri_implied(i):
        if b.via[i]:
            p = tri_path(i)
            if p is F:
                return F
            if p is U:
                return U
        dest = b.dest[i]
        occ = b.occupant.get(dest)
        h2 = b.h2h[i]
        vacated = T if occ is None else (
            F if occ == h2 else (vals.get(occ, F) if occ in b.dest else F))
        lo_a = hi_a = None
        results = []
        for vac in ([vacated] if vacated is not U else [T, F]):
            if vac is T:
                lo, hi = strength(1, b.sup_move[i])
                alo = ahi = 0
            else:
                defender = b.power[occ]
                if defender == b.power[i]:
                    results.append(F)
                    continue
                lo, hi = strength(1, [s for s in b.sup_move[i]
                                      if b.power[s] != defender])
                if occ == h2:
                    alo, ahi = strength(1, b.sup_move[occ])
                elif occ in b.dest:
                    alo, ahi = 1, 1
                else:
                    alo, ahi = strength(1, b.sup_hold[occ])
            verdict = T if lo > ahi else (F if hi <= alo else U)
            if verdict is not F:
                # competitors can still stop it
                for m in b.moves_into[dest]:
                    if m == i:
                        continue
                    gone = F
                    if b.via.get(m):
                        pm = tri_path(m)
                        if pm is F:
                            continue
                        gone = U if pm is U else F
                    if b.h2h[m] is not None:
                        lost = vals.get(b.h2h[m], U)
                        if lost is T:
                            continue
                        if lost is U:
                            gone = U
                    plo, phi = strength(1, b.sup_move[m])
                    if gone is U:
                        plo = 0
                    if lo > phi:
                        continue
                    if hi <= plo:
                        verdict = F
                        break
                    verdict = U if verdict is T else verdict
            results.append(verdict)
        if all(r is T for r in results):
            return T
        if all(r is F for r in results):
            return F
        return U

    changed = True
    while changed:
        changed = False
        for i in b.moves:
            if vals[i] is U:
                v = tri_implied(i)
                if v is not U:
                    vals[i] = v
                    changed = True
    return vals


def _or(a, c):
    if a is T or c is T:
        return T
    if a is F and c is F:
        return F
    return U


def _not(a):
    return U if a is U else not a


def _reach(b: _Board, i: int, usable: set[str]) -> bool:
    src, goal = b.prov[i], b.dest[i]
    frontier = [w for w in b.map.coastal_waters.get(src, ()) if w in usable]
    seen = set(frontier)
    while frontier:
        w = frontier.pop()
        if goal in b.map.water_coasts[w]:
            return True
        for x in b.map.water_water[w]:
            if x in usable and x not in seen:
                seen.add(x)
                frontier.append(x)
    return False


def oracle_resolve(map: MapGraph, state: GameState,
                   pairs: list[tuple[Unit, Order]]) -> dict:
    """Exhaustively resolve a movement phase.

    Returns dict with ``success`` (order -> bool over every order),
    ``positions`` (unit -> final location), ``dislodged`` (unit ->
    attacker origin or None), ``standoffs``.
    """
    b = _Board(map, pairs)
    forced: dict[int, bool] = {}
    sols = _consistent(b, forced)
    if len(sols) > 1:
        # rotations, convoyed swaps, and leftover support/attack ambiguity
        # all settle in favour of movement: the pointwise-max assignment
        best = {i: max(s[i] for s in sols) for i in b.moves}
        if best in sols:
            sols = [best]
    if len(sols) != 1:
        # paradox: fail convoyed moves in the undetermined core
        vals = _propagate(b, forced)
        core_vias = [i for i in b.moves if vals[i] is U and b.via[i]]
        assert core_vias, "no unique solution and no convoy core"
        forced = {i: False for i in core_vias}
        sols = _consistent(b, forced)
        if len(sols) > 1:
            best = {i: max(s[i] for s in sols) for i in b.moves}
            assert best in sols, "pointwise max not consistent after forcing"
            sols = [best]
        assert len(sols) == 1, f"paradox rule left {len(sols)} solutions"
    sigma = sols[0]
    f = _Facts(b, sigma)

    success: dict[Order, bool] = {}
    positions: dict[Unit, str] = {}
    dislodged: dict[Unit, str | None] = {}
    for i, (u, o) in enumerate(zip(b.units, b.orders)):
        here = b.prov[i]
        if isinstance(o, Move):
            success[o] = sigma[i]
        elif isinstance(o, (SupportMove, SupportHold)):
            success[o] = bool(b.matched.get(i)) and f.given(i)
        elif isinstance(o, Convoy):
            t = next((t for t, ws in b.fleet_for.items() if here in ws), None)
            success[o] = (t is not None and here not in f.dislodged_prov
                          and f.path_ok(t))
        else:
            success[o] = here not in f.dislodged_prov
        if isinstance(o, Move) and sigma[i]:
            positions[u] = o.dest
        elif here in f.dislodged_prov:
            winner = next(m for m in b.moves_into[here]
                          if m != i and sigma[m])
            dislodged[u] = None if b.via[winner] else b.prov[winner]
        else:
            positions[u] = u.loc

    ends = {map.province_of(l) for l in positions.values()}
    standoffs = {p for p, ms in b.moves_into.items()
                 if p not in ends and any(
                     not sigma[m] and (not b.via[m] or f.path_ok(m))
                     for m in ms)}
    return {"success": success, "positions": positions,
            "dislodged": dislodged, "standoffs": standoffs}


# -- brute-force legality oracle -----------------------------------------------


def _can_reach(map: MapGraph, unit: Unit, province: str) -> bool:
    """Direct (convoy-free) reach of a province, any coast."""
    if unit.kind == ARMY:
        return province in map.army.get(map.province_of(unit.loc), ())
    return any(map.province_of(d) == province
               for d in map.fleet.get(unit.loc, ()))


class _ChainIndex:
    """Connected components of fleet-occupied waters, built once per state."""

    def __init__(self, map: MapGraph, state: GameState):
        self.map = map
        waters = {map.province_of(u.loc) for u in state.units
                  if u.kind == FLEET} & map.water_provinces
        self.comp_of: dict[str, int] = {}
        self.comp_coasts: list[set[str]] = []
        for w in sorted(waters):
            if w in self.comp_of:
                continue
            comp = {w}
            frontier = [w]
            while frontier:
                x = frontier.pop()
                for y in map.water_water[x]:
                    if y in waters and y not in comp:
                        comp.add(y)
                        frontier.append(y)
            idx = len(self.comp_coasts)
            for x in comp:
                self.comp_of[x] = idx
            self.comp_coasts.append(
                set().union(*(map.water_coasts[x] for x in comp)))

    def convoyable(self, src: str, dest: str, through: str | None = None) -> bool:
        for w in self.map.coastal_waters.get(src, ()):
            c = self.comp_of.get(w)
            if c is None:
                continue
            if through is not None and self.comp_of.get(through) != c:
                continue
            if dest in self.comp_coasts[c]:
                return True
        return False


def _convoyable(map: MapGraph, state: GameState, src: str, dest: str,
                through: str | None = None) -> bool:
    return _ChainIndex(map, state).convoyable(src, dest, through)


def enumerate_legal(map: MapGraph, state: GameState, loc: str,
                    chains: "_ChainIndex | None" = None) -> set[Order]:
    """All legal orders for ``loc``, by generate-all + filter."""
    kind = state.phase.kind
    if kind == MOVEMENT:
        return _enumerate_movement(map, state, loc, chains)
    if kind == RETREAT:
        return _enumerate_retreat(map, state, loc)
    return _enumerate_adjustment(map, state, loc)


def _enumerate_movement(map, state, loc, chains=None):
    unit = next((u for u in state.units if u.loc == loc), None)
    if unit is None:
        return set()
    chains = chains or _ChainIndex(map, state)
    ref = UnitRef(unit.kind, unit.loc)
    here = map.province_of(loc)
    out: set[Order] = set()
    for cand_loc in map.names:
        if Hold(ref) not in out:
            out.add(Hold(ref))
        # moves
        if map.can_host(unit.kind, cand_loc):
            if cand_loc in map.adjacent(loc, unit.kind):
                out.add(Move(ref, cand_loc, False))
        if (unit.kind == ARMY and cand_loc != here
                and map.locations[cand_loc].kind == "coastal"
                and map.locations[cand_loc].coast is None
                and chains.convoyable(here, cand_loc)):
            out.add(Move(ref, cand_loc, True))
    my_reach = {p for p in map.provinces if _can_reach(map, unit, p)}
    for other in state.units:
        if other.loc == unit.loc:
            continue
        op = map.province_of(other.loc)
        oref = UnitRef(other.kind, other.loc)
        if op in my_reach:
            out.add(SupportHold(ref, oref))
        their_reach = {p for p in map.provinces if _can_reach(map, other, p)}
        for dest in my_reach:
            if dest == op:
                continue
            mover_ok = dest in their_reach or (
                other.kind == ARMY
                and map.locations[dest].kind == "coastal"
                and map.locations[dest].coast is None
                and chains.convoyable(op, dest))
            if mover_ok:
                out.add(SupportMove(ref, oref, dest))
        if (unit.kind == FLEET and here in map.water_provinces
                and other.kind == ARMY):
            for dest in map.provinces:
                if (dest != op and map.locations[dest].kind == "coastal"
                        and map.locations[dest].coast is None
                        and chains.convoyable(op, dest, through=here)):
                    out.add(Convoy(ref, oref, dest))
    return out


def _enumerate_retreat(map, state, loc):
    entry = next((d for d in state.dislodged if d.unit.loc == loc), None)
    if entry is None:
        return set()
    unit = entry.unit
    ref = UnitRef(unit.kind, unit.loc)
    out: set[Order] = {Disband(ref)}
    occupied = {map.province_of(u.loc) for u in state.units}
    origin = (map.province_of(entry.attacker_origin)
              if entry.attacker_origin else None)
    for d in map.names:
        p = map.province_of(d)
        if (d in map.adjacent(loc, unit.kind) and p not in occupied
                and p not in state.standoffs and p != origin):
            out.add(Retreat(ref, d))
    return out


def _enumerate_adjustment(map, state, loc):
    out: set[Order] = set()
    for power in map.home_centers:
        count = build_count(state, power, map)
        if count > 0 and loc in open_build_sites(state, power, map):
            out.add(WAIVE)
            out.add(Build(ARMY, loc))
            lk = map.locations[loc]
            if lk.kind == "coastal":
                if loc in map.split_provinces:
                    for c in map.fleet_positions(loc):
                        out.add(Build(FLEET, c))
                else:
                    out.add(Build(FLEET, loc))
        if count < 0:
            unit = next((u for u in state.units
                         if u.loc == loc and u.power == power), None)
            if unit is not None:
                out.add(Disband(UnitRef(unit.kind, unit.loc)))
                out.add(WAIVE)
    return out
