"""Baseline agents and the bridge to external (wire-protocol) agents.

Agents receive an :class:`AgentObservation` and return an
:class:`AgentDecision` whose orders all come from the provided legal
sets. Seeded agents are bit-reproducible.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .legal import LegalSet, unit_ref
from .map import ARMY, FLEET, MapGraph
from .orders import (Build, Disband, Hold, Move, Order, Retreat,
                     SupportHold, SupportMove, Waive, format_order)
from .state import (MOVEMENT, RETREAT, GameState, Phase, Unit,
                    build_count, units_requiring_orders)


@dataclass
class AgentObservation:
    power: str
    phase: Phase
    state: GameState
    #: effective orders of the last movement phase, all powers
    prev_orders: dict[str, list[Order]]
    #: legal orders per orderable location of this power
    legal: dict[str, LegalSet]
    map: MapGraph


@dataclass
class AgentDecision:
    orders: list[Order]
    within_budget: bool = True


def observe(game, power: str,
            all_legal: dict[str, LegalSet] | None = None) -> AgentObservation:
    """Build the observation for one power from a running game."""
    from .legal import all_legal_orders
    state = game.state
    locs = units_requiring_orders(state, power, game.map)
    if all_legal is None:
        all_legal = all_legal_orders(game.map, state, power)
    legal = {loc: all_legal[loc] for loc in locs if loc in all_legal}
    return AgentObservation(power, state.phase, state,
                            dict(game.last_movement), legal, game.map)


def _order_sort_key(order: Order) -> str:
    return format_order(order)


class HoldAgent:
    """Civil-disorder baseline: every unit holds, everything else defaults."""

    name = "hold"

    def decide(self, obs: AgentObservation) -> AgentDecision:
        if obs.phase.kind != MOVEMENT:
            return AgentDecision([])
        orders = [Hold(unit_ref(u)) for u in obs.state.units_of(obs.power)]
        return AgentDecision(orders)


class RandomAgent:
    """Uniform i.i.d. choice per location from the legal sets."""

    name = "random"

    def __init__(self, seed: int = 0):
        self.rng = random.Random(seed)

    def decide(self, obs: AgentObservation) -> AgentDecision:
        orders = []
        for loc in sorted(obs.legal):
            options = sorted(obs.legal[loc], key=_order_sort_key)
            if options:
                orders.append(self.rng.choice(options))
        return AgentDecision(orders)


class GreedyAgent:
    """Conquers adjacent supply centers, marches toward the nearest one
    otherwise; never supports or convoys. Deterministic."""

    name = "greedy"

    def decide(self, obs: AgentObservation) -> AgentDecision:
        state, map, power = obs.state, obs.map, obs.power
        if obs.phase.kind == MOVEMENT:
            return AgentDecision([self._move(obs, u)
                                  for u in state.units_of(power)])
        if obs.phase.kind == RETREAT:
            orders = []
            for loc in sorted(obs.legal):
                retreats = sorted((o for o in obs.legal[loc]
                                   if isinstance(o, Retreat)),
                                  key=_order_sort_key)
                ref = next(iter(obs.legal[loc])).unit
                orders.append(retreats[0] if retreats else Disband(ref))
            return AgentDecision(orders)
        # adjustment: build armies alphabetically; leave disbands to the
        # engine's distance rule
        orders = []
        for loc in sorted(obs.legal):
            build = next((o for o in sorted(obs.legal[loc], key=_order_sort_key)
                          if isinstance(o, Build) and o.kind == ARMY), None)
            if build is None:
                build = next((o for o in sorted(obs.legal[loc],
                                                key=_order_sort_key)
                              if isinstance(o, Build)), None)
            if build is not None:
                orders.append(build)
        return AgentDecision(orders)

    def _move(self, obs: AgentObservation, unit: Unit) -> Order:
        state, map, power = obs.state, obs.map, obs.power
        legal = obs.legal.get(unit.loc, LegalSet())
        moves = {o.dest: o for o in legal
                 if isinstance(o, Move) and not o.via_convoy}
        mine = state.owned_centers(power)
        targets = sorted(d for d in moves
                         if map.province_of(d) in map.supply_centers
                         and map.province_of(d) not in mine)
        if targets:
            neutral = [d for d in targets
                       if state.owner_of(map.province_of(d)) is None]
            return moves[(neutral or targets)[0]]
        # march toward the nearest foreign supply center
        dist = map.distances(unit.kind)
        here = map.province_of(unit.loc)
        goals = [sc for sc in map.supply_centers if sc not in mine]

        def closeness(dest: str) -> int:
            p = map.province_of(dest)
            return min((dist[p].get(g, 99) for g in goals), default=99)

        if goals and moves:
            best = min(sorted(moves), key=closeness)
            if closeness(best) < min(dist[here].get(g, 99) for g in goals):
                return moves[best]
        return Hold(unit_ref(unit))


class DumbbotAgent:
    """Two-pass province-value bot.

    Base values come from supply-center ownership and threat; five
    rounds of neighbourhood diffusion (value += 0.5 * mean of
    neighbours) spread them; units chase the highest-value reachable
    province, falling back to next-best on collisions, and support a
    neighbour's contested attack when their own best option is worth
    less. Builds and disbands follow the same value map. A seeded
    +/-5% value jitter keeps play diverse.
    """

    name = "dumbbot"
    DIFFUSION_ROUNDS = 5
    DECAY = 0.5
    ATTACK_NEUTRAL = 10.0
    ATTACK_ENEMY = 12.0
    DEFEND_THREATENED = 25.0   # defense must outrank diffusion-boosted attacks
    OWN_SAFE = 1.0
    NOISE = 0.05

    def __init__(self, seed: int = 0):
        self.rng = random.Random(seed)

    # -- value map ------------------------------------------------------------

    def _values(self, obs: AgentObservation) -> dict[str, float]:
        state, map, power = obs.state, obs.map, obs.power
        occupier = {map.province_of(u.loc): u.power for u in state.units}
        hostile = {map.province_of(u.loc) for u in state.units
                   if u.power != power}
        threatened = set()
        for sc in state.owned_centers(power):
            nbrs = {map.province_of(x) for loc in map.province_locations[sc]
                    for x in map.union_adj[loc]}
            if nbrs & hostile:
                threatened.add(sc)

        value = {p: 0.0 for p in map.provinces}
        for sc in map.supply_centers:
            owner = state.owner_of(sc)
            if owner == power:
                value[sc] = (self.DEFEND_THREATENED if sc in threatened
                             else self.OWN_SAFE)
            elif owner is None:
                value[sc] = self.ATTACK_NEUTRAL
            else:
                value[sc] = self.ATTACK_ENEMY

        prov_adj = {p: sorted({map.province_of(x)
                               for loc in map.province_locations[p]
                               for x in map.union_adj[loc]} - {p})
                    for p in map.provinces}
        for _ in range(self.DIFFUSION_ROUNDS):
            nxt = {}
            for p in map.provinces:
                nbrs = prov_adj[p]
                mean = sum(value[q] for q in nbrs) / len(nbrs) if nbrs else 0.0
                nxt[p] = value[p] + self.DECAY * mean
            value = nxt
        for p in value:
            value[p] *= 1.0 + self.rng.uniform(-self.NOISE, self.NOISE)
        return value

    def decide(self, obs: AgentObservation) -> AgentDecision:
        if obs.phase.kind == MOVEMENT:
            return self._movement(obs)
        if obs.phase.kind == RETREAT:
            return self._retreats(obs)
        return self._adjustments(obs)

    def _movement(self, obs: AgentObservation) -> AgentDecision:
        state, map, power = obs.state, obs.map, obs.power
        value = self._values(obs)
        occupier = {map.province_of(u.loc): u for u in state.units}

        # rank each unit's move options by target value (own spot included)
        prefs: dict[str, list[tuple[float, Order]]] = {}
        for loc in sorted(obs.legal):
            unit_orders = obs.legal[loc]
            ref = next(iter(unit_orders)).unit
            here = map.province_of(loc)
            options = [(value[here], Hold(ref))]
            for o in unit_orders:
                if isinstance(o, Move) and not o.via_convoy:
                    options.append((value[map.province_of(o.dest)], o))
            options.sort(key=lambda t: (-t[0], _order_sort_key(t[1])))
            prefs[loc] = options

        # assign destinations greedily, best claims first
        claimed: dict[str, str] = {}
        chosen: dict[str, Order] = {}
        for loc in sorted(prefs, key=lambda l: -prefs[l][0][0]):
            for val, order in prefs[loc]:
                dest = map.province_of(order.dest) if isinstance(order, Move) \
                    else map.province_of(loc)
                if claimed.get(dest) is None:
                    claimed[dest] = loc
                    chosen[loc] = order
                    break
            else:
                chosen[loc] = prefs[loc][0][1]

        # support a neighbour's contested attack (or a braced defender)
        # instead of a weaker move of our own
        for loc in sorted(chosen):
            mine = chosen[loc]
            my_val = (value[map.province_of(mine.dest)]
                      if isinstance(mine, Move) else value[map.province_of(loc)])
            best = None
            for other_loc, theirs in chosen.items():
                if other_loc == loc:
                    continue
                if isinstance(theirs, Move):
                    target = map.province_of(theirs.dest)
                    defender = occupier.get(target)
                    if defender is None or defender.power == power:
                        continue  # uncontested or friendly
                    support = SupportMove(mine.unit, theirs.unit, target)
                elif isinstance(theirs, Hold):
                    target = map.province_of(other_loc)
                    if value[target] <= self.OWN_SAFE * 2:
                        continue  # nothing worth bracing
                    support = SupportHold(mine.unit, theirs.unit)
                else:
                    continue
                if support in obs.legal[loc] and value[target] > my_val:
                    if best is None or value[target] > best[0]:
                        best = (value[target], support)
            if best is not None:
                chosen[loc] = best[1]
        return AgentDecision([chosen[loc] for loc in sorted(chosen)])

    def _retreats(self, obs: AgentObservation) -> AgentDecision:
        value = self._values(obs)
        map = obs.map
        orders = []
        for loc in sorted(obs.legal):
            options = sorted(obs.legal[loc], key=_order_sort_key)
            retreats = [(value[map.province_of(o.dest)], o) for o in options
                        if isinstance(o, Retreat)]
            if retreats:
                retreats.sort(key=lambda t: (-t[0], _order_sort_key(t[1])))
                orders.append(retreats[0][1])
            else:
                orders.append(next(o for o in options if isinstance(o, Disband)))
        return AgentDecision(orders)

    def _adjustments(self, obs: AgentObservation) -> AgentDecision:
        state, map, power = obs.state, obs.map, obs.power
        value = self._values(obs)
        count = build_count(state, power, map)
        orders: list[Order] = []
        if count > 0:
            sites = sorted(obs.legal, key=lambda p: -value[p])[:count]
            for site in sites:
                builds = [o for o in obs.legal[site] if isinstance(o, Build)]
                if not builds:
                    continue
                # prefer a fleet when the sea side looks more valuable
                fleet_builds = [b for b in builds if b.kind == FLEET]
                army_builds = [b for b in builds if b.kind == ARMY]
                sea_vals = [value[map.province_of(x)]
                            for x in map.fleet.get(site, ())
                            ] if site not in map.split_provinces else [
                    value[map.province_of(x)]
                    for c in map.fleet_positions(site)
                    for x in map.fleet.get(c, ())]
                land_vals = [value[q] for q in map.army.get(site, ())]
                want_fleet = (fleet_builds and sea_vals and
                              (not land_vals or
                               max(sea_vals) > max(land_vals)))
                pool = fleet_builds if want_fleet else army_builds or fleet_builds
                orders.append(sorted(pool, key=_order_sort_key)[0])
        elif count < 0:
            units = [(value[map.province_of(u.loc)], u)
                     for u in state.units_of(power)]
            units.sort(key=lambda t: (t[0], t[1].loc))
            for _, u in units[:-count]:
                orders.append(Disband(unit_ref(u)))
        return AgentDecision(orders)


class ExternalAgent:
    """Wire-protocol bridge; substitutes civil disorder on failure."""

    name = "external"

    def __init__(self, session, timeout: float | None = None):
        self.session = session
        self.timeout = timeout
        self.failures = 0

    def close(self):
        self.session.close()

    def decide(self, obs: AgentObservation) -> AgentDecision:
        from .protocol import request_orders
        try:
            texts = request_orders(self.session, obs, timeout=self.timeout)
            orders = []
            from .orders import parse_order
            for t in texts:
                orders.append(parse_order(t))
        except Exception:
            self.failures += 1
            fallback = HoldAgent().decide(obs)
            fallback.within_budget = False
            return fallback
        # replace anything illegal with a hold, per check semantics
        kept: list[Order] = []
        legal_all = frozenset().union(*obs.legal.values()) if obs.legal else frozenset()
        for o in orders:
            if o in legal_all:
                kept.append(o)
            elif isinstance(o, Waive):
                kept.append(o)
            elif hasattr(o, "unit") and obs.phase.kind == MOVEMENT:
                self.failures += 1
                kept.append(Hold(o.unit))
            else:
                self.failures += 1
        return AgentDecision(kept)


BUILTIN_AGENTS = {
    "hold": HoldAgent,
    "random": RandomAgent,
    "greedy": GreedyAgent,
    "dumbbot": DumbbotAgent,
}


def make_agent(spec: str, seed: int = 0):
    """Build an agent from a spec string: ``random``, ``greedy``,
    ``dumbbot``, ``hold``, ``process:<argv>`` or ``tcp:<host>:<port>``."""
    if spec in ("hold", "greedy"):
        return BUILTIN_AGENTS[spec]()
    if spec in ("random", "dumbbot"):
        return BUILTIN_AGENTS[spec](seed=seed)
    if spec.startswith("process:") or spec.startswith("tcp:"):
        from .protocol import open_session
        return ExternalAgent(open_session(spec))
    raise ValueError(f"unknown agent spec {spec!r}")


def random_agent(obs: AgentObservation, seed: int) -> AgentDecision:
    """Functional form of :class:`RandomAgent` (fresh seed each call)."""
    return RandomAgent(seed).decide(obs)


def greedy_agent(obs: AgentObservation) -> AgentDecision:
    return GreedyAgent().decide(obs)


def dumbbot_agent(obs: AgentObservation, seed: int) -> AgentDecision:
    return DumbbotAgent(seed).decide(obs)


def hold_agent(obs: AgentObservation) -> AgentDecision:
    return HoldAgent().decide(obs)
