"""Standard-map topology.

Immutable after load: locations with their kinds, army/fleet adjacency,
supply and home centers, opening units, board coordinates, and the
normalized adjacency matrix consumed by the board encoders.

Location index order is lexicographic over canonical location names
(coast locations sort directly after their parent province, e.g.
``BUL < BUL/EC < BUL/SC``); this ordering is the row/column order of
every 81-row tensor produced anywhere in the package.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import MapIntegrityError, UnknownLocationError

ARMY = "A"
FLEET = "F"
UNIT_KINDS = (ARMY, FLEET)

POWERS = ("AUSTRIA", "ENGLAND", "FRANCE", "GERMANY", "ITALY", "RUSSIA", "TURKEY")

LAND, WATER, COASTAL = "land", "water", "coastal"

#: sha256 of data/standard.map; guards against silent data-file edits.
_STANDARD_SHA256 = "58c02b6f8875966419883b00829c0a1f293f9c74e9bc17e1b62f42344681d926"


@dataclass(frozen=True)
class Location:
    """One of the 81 board positions.

    ``name`` is canonical text (``PAR``, ``SPA/NC``); ``province`` strips the
    coast tag; ``coast`` is ``NC``/``SC``/``EC`` on split-coast locations and
    ``None`` elsewhere.
    """

    name: str
    province: str
    coast: str | None
    kind: str


class MapGraph:
    """Validated, immutable topology of one map.

    All containers are frozen (tuples/frozensets) or treated as such;
    instances are safe to share across threads and processes.
    """

    def __init__(self, name, version, locations, army, fleet, supply_centers,
                 home_centers, start_units, coords):
        self.name = name
        self.version = version
        self.locations: dict[str, Location] = locations
        self.army: dict[str, frozenset[str]] = army
        self.fleet: dict[str, frozenset[str]] = fleet
        self.supply_centers: frozenset[str] = supply_centers
        self.home_centers: dict[str, frozenset[str]] = home_centers
        self.start_units: dict[str, tuple[tuple[str, str], ...]] = start_units
        self.coords: dict[str, tuple[float, float]] = coords

        self.names: tuple[str, ...] = tuple(sorted(locations))
        self.index: dict[str, int] = {n: i for i, n in enumerate(self.names)}
        self.provinces: tuple[str, ...] = tuple(
            sorted({loc.province for loc in locations.values()}))

        by_prov: dict[str, list[str]] = {}
        for n in self.names:
            by_prov.setdefault(locations[n].province, []).append(n)
        self.province_locations: dict[str, tuple[str, ...]] = {
            p: tuple(ns) for p, ns in by_prov.items()}
        self.coast_parent: dict[str, str] = {
            n: loc.province for n, loc in locations.items() if loc.coast}
        self.split_provinces: frozenset[str] = frozenset(self.coast_parent.values())
        self.water_provinces: frozenset[str] = frozenset(
            n for n, loc in locations.items() if loc.kind == WATER)

        # Union graph over all 81 locations: army edges (between parent
        # locations), fleet edges, and parent<->coast identification edges.
        union: dict[str, set[str]] = {n: set() for n in self.names}
        for a, bs in self.army.items():
            for b in bs:
                union[a].add(b)
                union[b].add(a)
        for a, bs in self.fleet.items():
            for b in bs:
                union[a].add(b)
                union[b].add(a)
        for coast, parent in self.coast_parent.items():
            union[coast].add(parent)
            union[parent].add(coast)
        self.union_adj: dict[str, frozenset[str]] = {
            n: frozenset(v) for n, v in union.items()}

        # Convoy plumbing, all at province level: which waters an army can
        # embark to from a coastal province, water-to-water hops, and which
        # coastal provinces a water province can land on.
        self.coastal_waters: dict[str, frozenset[str]] = {}
        for p in self.provinces:
            if p in self.water_provinces:
                continue
            waters: set[str] = set()
            for ln in self.province_locations[p]:
                waters.update(w for w in self.fleet.get(ln, ())
                              if w in self.water_provinces)
            if waters:
                self.coastal_waters[p] = frozenset(waters)
        self.water_water: dict[str, frozenset[str]] = {
            w: frozenset(x for x in self.fleet[w] if x in self.water_provinces)
            for w in self.water_provinces}
        self.water_coasts: dict[str, frozenset[str]] = {
            w: frozenset(self.locations[x].province
                         for x in self.fleet[w] if x not in self.water_provinces)
            for w in self.water_provinces}

        self._distances: dict[str, dict[str, dict[str, int]]] = {}

    # -- queries ------------------------------------------------------------

    def location(self, name: str) -> Location:
        try:
            return self.locations[name]
        except KeyError:
            raise UnknownLocationError(name) from None

    def province_of(self, name: str) -> str:
        return self.location(name).province

    def adjacent(self, loc: str, unit_kind: str) -> frozenset[str]:
        """Legal single-step destinations for a unit of ``unit_kind`` at ``loc``.

        Armies move at province level; fleets at location level (a fleet on
        SPA/NC only reaches SPA/NC's neighbours). No convoys.
        """
        location = self.location(loc)
        if unit_kind == ARMY:
            return self.army.get(location.province, frozenset())
        return self.fleet.get(loc, frozenset())

    def can_host(self, unit_kind: str, loc: str) -> bool:
        """Whether a unit of this kind may ever sit at ``loc``."""
        location = self.location(loc)
        if unit_kind == ARMY:
            return location.kind != WATER and location.coast is None
        if location.kind == WATER:
            return True
        if location.kind == COASTAL:
            if location.province in self.split_provinces:
                return location.coast is not None
            return True
        return False

    def fleet_positions(self, province: str) -> tuple[str, ...]:
        """Locations where a fleet can sit within ``province``."""
        return tuple(n for n in self.province_locations[province]
                     if self.can_host(FLEET, n))

    def distances(self, graph: str = "union") -> dict[str, dict[str, int]]:
        """All-pairs BFS hop counts; ``graph`` is ``union``, ``A`` or ``F``.

        Army/fleet distances are province-level (coasts collapse into their
        parent); union distances are location-level.
        """
        if graph not in self._distances:
            if graph == "union":
                adj = self.union_adj
            elif graph == ARMY:
                adj = self.army
            elif graph == FLEET:
                prov_adj: dict[str, set[str]] = {}
                for a, bs in self.fleet.items():
                    pa = self.province_of(a)
                    for b in bs:
                        prov_adj.setdefault(pa, set()).add(self.province_of(b))
                adj = {p: frozenset(v) for p, v in prov_adj.items()}
            else:
                raise ValueError(f"unknown graph {graph!r}")
            self._distances[graph] = {src: _bfs(adj, src) for src in adj}
        return self._distances[graph]

    def diameter(self) -> int:
        """Longest shortest path over the union graph (all 81 locations)."""
        dists = self.distances("union")
        return max(max(d.values()) for d in dists.values())


def _bfs(adj, src) -> dict[str, int]:
    dist = {src: 0}
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj.get(u, ()):
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


def normalized_adjacency(map: MapGraph) -> np.ndarray:
    """Symmetric-normalized union adjacency with self-loops.

    A-hat = D^-1/2 (A + I) D^-1/2 over the 81-location index order; keeps
    the spectral radius at most 1, which deep graph-conv stacks need.
    """
    n = len(map.names)
    a = np.zeros((n, n), dtype=np.float64)
    for loc, nbrs in map.union_adj.items():
        i = map.index[loc]
        for b in nbrs:
            a[i, map.index[b]] = 1.0
    a += np.eye(n)
    d = a.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(d)
    return a * inv_sqrt[:, None] * inv_sqrt[None, :]


def adjacent(map: MapGraph, loc: str, unit_kind: str) -> frozenset[str]:
    """Module-level alias of :meth:`MapGraph.adjacent`."""
    return map.adjacent(loc, unit_kind)


# -- loading ------------------------------------------------------------------


def _fail(check: str) -> None:
    raise MapIntegrityError(f"map data violates invariant: {check}")


def _parse_sections(text: str) -> dict[str, list[str]]:
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = sections.setdefault(line[1:-1], [])
        elif current is None:
            _fail("content before first section header")
        else:
            current.append(line)
    return sections


def _load_map_text(text: str, name: str) -> MapGraph:
    sections = _parse_sections(text)
    for required in ("meta", "locations", "supply", "home", "army", "fleet",
                     "units", "coords"):
        if required not in sections:
            _fail(f"missing [{required}] section")

    meta = dict(line.split(None, 1) for line in sections["meta"])

    locations: dict[str, Location] = {}
    for line in sections["locations"]:
        parts = line.split()
        if len(parts) != 2 or parts[1] not in (LAND, WATER, COASTAL):
            _fail(f"bad location line {line!r}")
        loc_name = parts[0]
        if "/" in loc_name:
            province, coast = loc_name.split("/", 1)
        else:
            province, coast = loc_name, None
        locations[loc_name] = Location(loc_name, province, coast, parts[1])

    def adjacency(section: str) -> dict[str, frozenset[str]]:
        rel: dict[str, frozenset[str]] = {}
        for line in sections[section]:
            head, _, rest = line.partition(":")
            key = head.strip()
            if key not in locations:
                _fail(f"[{section}] unknown location {key!r}")
            ns = rest.split()
            for n in ns:
                if n not in locations:
                    _fail(f"[{section}] unknown neighbour {n!r} of {key}")
            rel[key] = frozenset(ns)
        for a, bs in rel.items():
            for b in bs:
                if a not in rel.get(b, frozenset()):
                    _fail(f"[{section}] asymmetric edge {a} -> {b}")
        return rel

    army = adjacency("army")
    fleet = adjacency("fleet")

    supply = frozenset(" ".join(sections["supply"]).split())
    home: dict[str, frozenset[str]] = {}
    for line in sections["home"]:
        power, _, rest = line.partition(":")
        home[power.strip()] = frozenset(rest.split())

    start_units: dict[str, tuple[tuple[str, str], ...]] = {}
    for line in sections["units"]:
        power, _, rest = line.partition(":")
        toks = rest.split()
        if len(toks) % 2:
            _fail(f"bad units line {line!r}")
        start_units[power.strip()] = tuple(
            (toks[i], toks[i + 1]) for i in range(0, len(toks), 2))

    coords: dict[str, tuple[float, float]] = {}
    for line in sections["coords"]:
        parts = line.split()
        if len(parts) != 3:
            _fail(f"bad coords line {line!r}")
        coords[parts[0]] = (float(parts[1]), float(parts[2]))

    graph = MapGraph(meta.get("name", name), meta.get("version", "?"),
                     locations, army, fleet, supply, home, start_units, coords)
    _validate(graph)
    return graph


def _validate(m: MapGraph) -> None:
    if len(m.names) != 81:
        _fail(f"expected 81 locations, found {len(m.names)}")
    if len(m.provinces) != 75:
        _fail(f"expected 75 provinces, found {len(m.provinces)}")
    if len(m.supply_centers) != 34:
        _fail(f"expected 34 supply centers, found {len(m.supply_centers)}")
    if not m.supply_centers <= set(m.provinces):
        _fail("supply center outside province set")
    if tuple(sorted(m.home_centers)) != POWERS:
        _fail("home centers must cover exactly the seven powers")
    for power, centers in m.home_centers.items():
        if not centers <= m.supply_centers:
            _fail(f"{power} home centers not all supply centers")
    for a, bs in m.army.items():
        if m.locations[a].kind == WATER:
            _fail(f"army adjacency at water location {a}")
        if m.locations[a].coast:
            _fail(f"army adjacency keyed by coast {a}")
        for b in bs:
            if m.locations[b].kind == WATER or m.locations[b].coast:
                _fail(f"army adjacency endpoint {b} invalid")
    for a, bs in m.fleet.items():
        if m.locations[a].kind == LAND:
            _fail(f"fleet adjacency at landlocked {a}")
        if m.locations[a].province in m.split_provinces and not m.locations[a].coast:
            _fail(f"fleet adjacency keyed by split-coast parent {a}")
    for power, units in m.start_units.items():
        for kind, loc in units:
            if kind not in UNIT_KINDS or loc not in m.locations:
                _fail(f"bad opening unit {kind} {loc}")
            if not m.can_host(kind, loc):
                _fail(f"opening unit {kind} {loc} on illegal terrain")
            if m.province_of(loc) not in m.home_centers[power]:
                _fail(f"opening unit {kind} {loc} outside {power} home centers")
    if set(m.coords) != set(m.names):
        _fail("coords must cover every location exactly")
    total_units = sum(len(u) for u in m.start_units.values())
    if total_units != 22:
        _fail(f"expected 22 opening units, found {total_units}")


@lru_cache(maxsize=None)
def load_standard_map() -> MapGraph:
    """Load, checksum and validate the embedded standard map."""
    data = resources.files("nopress.data").joinpath("standard.map").read_bytes()
    digest = hashlib.sha256(data).hexdigest()
    if digest != _STANDARD_SHA256:
        raise MapIntegrityError(
            f"standard.map checksum mismatch: {digest} != {_STANDARD_SHA256}")
    return _load_map_text(data.decode("utf-8"), "standard")
