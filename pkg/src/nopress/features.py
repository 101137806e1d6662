"""Observation encodings, the fixed order vocabulary, legality masks,
and the decoder's location ordering.

Board tensor (81 x 35 per location row):
  unit kind one-hot(3: army/fleet/none) | unit owner(8: powers+none) |
  buildable(1) | removable(1) | dislodged kind(3) | dislodged owner(8) |
  province kind(3: land/water/coastal) | supply-center owner(8)

Previous-orders tensor (81 x 40, last movement phase only):
  unit kind(3) | issuing power(8) | order kind(5: hold/move/support/
  convoy/none) | supported-unit owner(8) | destination occupant or
  supply-center power(8) | destination supply-center owner(8)

A fleet sitting on a split coast mirrors its unit block into the parent
province row of the board tensor. Rows are indexed by the map's
lexicographic location order; every one-hot block sums to exactly 1.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .legal import LegalSet, legal_orders
from .map import ARMY, FLEET, COASTAL, LAND, WATER, MapGraph, POWERS
from .orders import (Build, Convoy, Disband, Hold, Move, Order, Retreat,
                     SupportHold, SupportMove, UnitRef, WAIVE, format_order)
from .state import ADJUSTMENT, GameState, build_count, open_build_sites

TENSOR_LAYOUT_VERSION = "nopress-tensors-v1"

BOARD_WIDTH = 35
PREV_ORDER_WIDTH = 40

_POWER_IDX = {p: i for i, p in enumerate(POWERS)}   # none = index 7
_KIND_IDX = {ARMY: 0, FLEET: 1}                     # none = index 2
_TERRAIN_IDX = {LAND: 0, WATER: 1, COASTAL: 2}
_ORDER_KIND_IDX = {"hold": 0, "move": 1, "support": 2, "convoy": 3}  # none=4

# board tensor block offsets
_B_UNIT_KIND = 0      # 3
_B_UNIT_OWNER = 3     # 8
_B_BUILDABLE = 11     # 1
_B_REMOVABLE = 12     # 1
_B_DIS_KIND = 13      # 3
_B_DIS_OWNER = 16     # 8
_B_TERRAIN = 24       # 3
_B_SC_OWNER = 27      # 8

# previous-order tensor block offsets
_P_UNIT_KIND = 0      # 3
_P_POWER = 3          # 8
_P_ORDER_KIND = 11    # 5
_P_FRIEND = 16        # 8
_P_OPPONENT = 24      # 8
_P_SC_OWNER = 32      # 8


def _power_hot(row, offset, power):
    row[offset + (_POWER_IDX.get(power, 7))] = 1.0


def encode_board(map: MapGraph, state: GameState) -> np.ndarray:
    """81 x 35 float32 board encoding; deterministic."""
    t = np.zeros((len(map.names), BOARD_WIDTH), dtype=np.float32)

    buildable: set[str] = set()
    removable: set[str] = set()
    if state.phase.kind == ADJUSTMENT:
        for power in POWERS:
            count = build_count(state, power, map)
            if count > 0:
                buildable.update(open_build_sites(state, power, map))
            elif count < 0:
                removable.update(u.loc for u in state.units_of(power))

    unit_rows: dict[str, tuple[str, str]] = {}
    for u in state.units:
        unit_rows[u.loc] = (u.kind, u.power)
        parent = map.coast_parent.get(u.loc)
        if parent is not None:
            unit_rows[parent] = (u.kind, u.power)
    dis_rows: dict[str, tuple[str, str]] = {}
    for d in state.dislodged:
        dis_rows[d.unit.loc] = (d.unit.kind, d.unit.power)
        parent = map.coast_parent.get(d.unit.loc)
        if parent is not None:
            dis_rows[parent] = (d.unit.kind, d.unit.power)

    for name, i in map.index.items():
        row = t[i]
        loc = map.locations[name]
        if name in unit_rows:
            kind, power = unit_rows[name]
            row[_B_UNIT_KIND + _KIND_IDX[kind]] = 1.0
            _power_hot(row, _B_UNIT_OWNER, power)
        else:
            row[_B_UNIT_KIND + 2] = 1.0
            _power_hot(row, _B_UNIT_OWNER, None)
        if loc.province in buildable and loc.coast is None:
            row[_B_BUILDABLE] = 1.0
        if name in removable:
            row[_B_REMOVABLE] = 1.0
        if name in dis_rows:
            kind, power = dis_rows[name]
            row[_B_DIS_KIND + _KIND_IDX[kind]] = 1.0
            _power_hot(row, _B_DIS_OWNER, power)
        else:
            row[_B_DIS_KIND + 2] = 1.0
            _power_hot(row, _B_DIS_OWNER, None)
        row[_B_TERRAIN + _TERRAIN_IDX[loc.kind]] = 1.0
        if loc.province in map.supply_centers:
            _power_hot(row, _B_SC_OWNER, state.sc_ownership.get(loc.province))
        else:
            _power_hot(row, _B_SC_OWNER, None)
    return t


def encode_prev_orders(map: MapGraph,
                       last_movement_orders: dict[str, list[Order]],
                       state: GameState | None = None) -> np.ndarray:
    """81 x 40 float32 encoding of the last movement phase's orders.

    ``state`` supplies destination occupancy/ownership context; pass the
    state the orders were issued in (falls back to empty context).
    """
    t = np.zeros((len(map.names), PREV_ORDER_WIDTH), dtype=np.float32)
    occupier: dict[str, str] = {}
    owner = {}
    if state is not None:
        occupier = {map.province_of(u.loc): u.power for u in state.units}
        owner = state.sc_ownership

    filled: set[int] = set()
    for power, orders in last_movement_orders.items():
        for o in orders:
            if not isinstance(o, (Hold, Move, SupportHold, SupportMove, Convoy)):
                continue
            i = map.index.get(o.unit.loc)
            if i is None or i in filled:
                continue
            filled.add(i)
            row = t[i]
            row[_P_UNIT_KIND + _KIND_IDX[o.unit.kind]] = 1.0
            _power_hot(row, _P_POWER, power)

            friend = None
            dest = None
            if isinstance(o, Hold):
                kind = "hold"
            elif isinstance(o, Move):
                kind = "move"
                dest = map.province_of(o.dest)
            elif isinstance(o, SupportHold):
                kind = "support"
                friend = occupier.get(map.province_of(o.target.loc))
                dest = map.province_of(o.target.loc)
            elif isinstance(o, SupportMove):
                kind = "support"
                friend = occupier.get(map.province_of(o.moving.loc))
                dest = o.dest
            else:
                kind = "convoy"
                friend = occupier.get(map.province_of(o.moving.loc))
                dest = o.dest
            row[_P_ORDER_KIND + _ORDER_KIND_IDX[kind]] = 1.0
            _power_hot(row, _P_FRIEND, friend)
            if dest is None:
                _power_hot(row, _P_OPPONENT, None)
                _power_hot(row, _P_SC_OWNER, None)
            else:
                _power_hot(row, _P_OPPONENT,
                           occupier.get(dest) or owner.get(dest))
                _power_hot(row, _P_SC_OWNER, owner.get(dest))

    for i in range(len(map.names)):
        if i not in filled:
            row = t[i]
            row[_P_UNIT_KIND + 2] = 1.0
            _power_hot(row, _P_POWER, None)
            row[_P_ORDER_KIND + 4] = 1.0
            _power_hot(row, _P_FRIEND, None)
            _power_hot(row, _P_OPPONENT, None)
            _power_hot(row, _P_SC_OWNER, None)
    return t


# -- decoder location ordering ---------------------------------------------------


@lru_cache(maxsize=4)
def _ranking(map: MapGraph) -> dict[str, int]:
    """Fixed reading order: breadth-first from the northwest-most
    location, frontier ties broken top-left to bottom-right by board
    coordinates. Precomputed once per map."""
    import heapq
    seed = min(map.names,
               key=lambda n: (map.coords[n][0] + map.coords[n][1], n))
    dist = {seed: 0}
    heap = [(0, map.coords[seed][1], map.coords[seed][0], seed)]
    rank: dict[str, int] = {}
    while heap:
        d, y, x, name = heapq.heappop(heap)
        if name in rank:
            continue
        rank[name] = len(rank)
        for nbr in map.union_adj[name]:
            nd = d + 1
            if nbr not in dist or nd < dist[nbr]:
                dist[nbr] = nd
                cx, cy = map.coords[nbr]
                heapq.heappush(heap, (nd, cy, cx, nbr))
    for name in map.names:   # unreachable safety net
        rank.setdefault(name, len(rank))
    return rank


def decode_ordering(map: MapGraph, locations) -> list[str]:
    """Total order over the given locations per the precomputed ranking."""
    rank = _ranking(map)
    return sorted(locations, key=lambda l: rank[l])


# -- order vocabulary -------------------------------------------------------------


class OrderVocabulary:
    """Indexed list of every map-possible order string plus WAIVE.

    Indices are the lexicographic rank of the canonical text, stable for
    a given map version. ``by_location`` lists candidate indices per
    acting location (build sites key by province); WAIVE appears in
    every list.
    """

    def __init__(self, map: MapGraph):
        self.map = map
        texts = sorted(_enumerate_orders(map))
        self.orders: tuple[str, ...] = tuple(texts)
        self.index: dict[str, int] = {t: i for i, t in enumerate(texts)}
        self.waive_index = self.index[format_order(WAIVE)]
        by_loc: dict[str, list[int]] = {name: [] for name in map.names}
        from .orders import parse_order, acting_loc
        for t, i in self.index.items():
            loc = acting_loc(parse_order(t))
            if loc is not None:
                by_loc[loc].append(i)
        for name in by_loc:
            by_loc[name].append(self.waive_index)
            by_loc[name].sort()
        self.by_location = {k: tuple(v) for k, v in by_loc.items()}

    def __len__(self):
        return len(self.orders)

    def encode(self, order: Order) -> int:
        return self.index[format_order(order)]

    def decode(self, idx: int) -> str:
        return self.orders[idx]


def _placements(map: MapGraph):
    for name in map.names:
        for kind in (ARMY, FLEET):
            if map.can_host(kind, name):
                yield kind, name


def _water_components(map: MapGraph):
    comp_of: dict[str, int] = {}
    comps: list[set[str]] = []
    for w in sorted(map.water_provinces):
        if w in comp_of:
            continue
        comp = {w}
        frontier = [w]
        while frontier:
            x = frontier.pop()
            for y in map.water_water[x]:
                if y not in comp:
                    comp.add(y)
                    frontier.append(y)
        for x in comp:
            comp_of[x] = len(comps)
        comps.append(comp)
    coasts = [sorted(set().union(*(map.water_coasts[w] for w in comp)))
              for comp in comps]
    return comp_of, comps, coasts


def _enumerate_orders(map: MapGraph) -> set[str]:
    out: set[str] = {format_order(WAIVE)}
    comp_of, comps, comp_coasts = _water_components(map)

    def army_convoy_dests(province: str) -> set[str]:
        dests: set[str] = set()
        for w in map.coastal_waters.get(province, ()):
            dests.update(comp_coasts[comp_of[w]])
        dests.discard(province)
        return dests

    # province -> unit forms that can stand there
    forms: dict[str, list[UnitRef]] = {}
    for kind, loc in _placements(map):
        forms.setdefault(map.province_of(loc), []).append(UnitRef(kind, loc))

    # province -> movers (any placement that can reach it, convoys included)
    movers_to: dict[str, set[UnitRef]] = {p: set() for p in map.provinces}
    for kind, loc in _placements(map):
        ref = UnitRef(kind, loc)
        if kind == ARMY:
            targets = set(map.army.get(map.province_of(loc), ()))
            targets |= army_convoy_dests(map.province_of(loc))
        else:
            targets = {map.province_of(d) for d in map.fleet.get(loc, ())}
        for p in targets:
            movers_to[p].add(ref)

    for kind, loc in _placements(map):
        ref = UnitRef(kind, loc)
        here = map.province_of(loc)
        out.add(format_order(Hold(ref)))
        out.add(format_order(Disband(ref)))
        dests = map.adjacent(loc, kind)
        for d in dests:
            out.add(format_order(Move(ref, d, False)))
            out.add(format_order(Retreat(ref, d)))
        if kind == ARMY:
            for d in army_convoy_dests(here):
                out.add(format_order(Move(ref, d, True)))
        reach = ({map.province_of(d) for d in dests} if kind == FLEET
                 else set(dests))
        for p in reach:
            for target in forms.get(p, ()):
                out.add(format_order(SupportHold(ref, target)))
            for mover in movers_to[p]:
                if map.province_of(mover.loc) != here:
                    out.add(format_order(SupportMove(ref, mover, p)))
        if kind == FLEET and here in map.water_provinces:
            coasts = comp_coasts[comp_of[here]]
            for src in coasts:
                for dest in coasts:
                    if src != dest:
                        out.add(format_order(
                            Convoy(ref, UnitRef(ARMY, src), dest)))

    for power, homes in map.home_centers.items():
        for h in homes:
            out.add(format_order(Build(ARMY, h)))
            loc = map.locations[h]
            if loc.kind == COASTAL:
                if h in map.split_provinces:
                    for c in map.fleet_positions(h):
                        out.add(format_order(Build(FLEET, c)))
                else:
                    out.add(format_order(Build(FLEET, h)))
    return out


@lru_cache(maxsize=4)
def order_vocabulary(map: MapGraph) -> OrderVocabulary:
    return OrderVocabulary(map)


def legality_mask(vocab: OrderVocabulary, state: GameState, loc: str,
                  map: MapGraph | None = None,
                  legal: LegalSet | None = None) -> np.ndarray:
    """Boolean mask over the vocabulary, true exactly on the indices of
    ``legal_orders(map, state, loc)``."""
    map = map or vocab.map
    mask = np.zeros(len(vocab), dtype=bool)
    if legal is None:
        legal = legal_orders(map, state, loc)
    for o in legal:
        mask[vocab.encode(o)] = True
    return mask


def tensor_to_wire(t: np.ndarray) -> dict:
    """Row-major serialization with the layout version tag."""
    return {"layout": TENSOR_LAYOUT_VERSION, "shape": list(t.shape),
            "data": [float(x) for x in t.reshape(-1)]}


def tensor_from_wire(d: dict) -> np.ndarray:
    if d.get("layout") != TENSOR_LAYOUT_VERSION:
        raise ValueError(f"unknown tensor layout {d.get('layout')!r}")
    return np.asarray(d["data"], dtype=np.float32).reshape(d["shape"])
