"""1-vs-6 evaluation, pooled tournaments, in-game ranking, TrueSkill.

Games are numbered and rating updates are applied strictly in game
order under a fixed seed, so every run is bit-reproducible however the
games themselves are scheduled.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .engine import Outcome, run_game
from .errors import StateError
from .map import MapGraph, POWERS
from .rating import Rating, rate


def _centers_by_phase(record: dict) -> list[dict[str, int]]:
    counts = []
    for entry in record["phases"]:
        centers = entry["state"].get("centers", {})
        counts.append({p: len(cs) for p, cs in centers.items()})
    return counts


def rank_game(record: dict) -> dict[str, int]:
    """Rank 1..7 per power, ties shared.

    Survivors (final centers > 0) rank above everyone eliminated,
    ordered by final center count; eliminated powers rank by elimination
    order, first out last.
    """
    if record["outcome"].get("type") == "ongoing":
        raise StateError("cannot rank an unfinished game")
    history = _centers_by_phase(record)
    if not history:
        raise StateError("empty game record")
    final = history[-1]

    # elimination time: last phase index at which the power still had a center
    last_alive: dict[str, int] = {}
    for power in POWERS:
        last_alive[power] = max(
            (i for i, counts in enumerate(history) if counts.get(power, 0)),
            default=-1)

    def key(power: str):
        alive = final.get(power, 0) > 0
        return (0, -final.get(power, 0)) if alive else (1, -last_alive[power])

    ordered = sorted(POWERS, key=key)
    ranks: dict[str, int] = {}
    for i, power in enumerate(ordered):
        if i and key(power) == key(ordered[i - 1]):
            ranks[power] = ranks[ordered[i - 1]]
        else:
            ranks[power] = i + 1
    return ranks


def trueskill_update(ratings: dict[str, Rating],
                     ranking: dict[str, int]) -> dict[str, Rating]:
    """Bayesian update of seven ratings from one game ranking."""
    powers = sorted(ranking)
    updated = rate([ratings[p] for p in powers], [ranking[p] for p in powers])
    return dict(zip(powers, updated))


@dataclass
class OneVsSixRow:
    agent_a: str
    agent_b: str
    games: int = 0
    wins: int = 0
    most_sc: int = 0
    survived: int = 0
    defeated: int = 0

    def as_dict(self) -> dict:
        n = max(self.games, 1)
        return {
            "Agent A (1x)": self.agent_a,
            "Agent B (6x)": self.agent_b,
            "% Win": 100.0 * self.wins / n,
            "% Most SC": 100.0 * self.most_sc / n,
            "% Survived": 100.0 * self.survived / n,
            "% Defeated": 100.0 * self.defeated / n,
            "# Games": self.games,
        }


def run_1v6(agent_a: str, agent_b: str, n_games: int, seed: int = 0,
            rules: dict | None = None, map: MapGraph | None = None,
            make_agent=None, keep_records: bool = False) -> dict:
    """One agent controls one power (round-robin over games), six copies
    of the other control the rest. Returns the summary row plus
    per-game details.
    """
    from .map import load_standard_map
    from .bots import make_agent as default_make_agent
    make_agent = make_agent or default_make_agent
    map = map or load_standard_map()
    rng = random.Random(seed)
    row = OneVsSixRow(agent_a, agent_b)
    details = []
    records = []
    for g in range(n_games):
        focus = POWERS[g % len(POWERS)]
        agents = {}
        for power in POWERS:
            spec = agent_a if power == focus else agent_b
            agents[power] = make_agent(spec, seed=rng.getrandbits(32))
        record = run_game(map, agents, rules=dict(rules or {}),
                          game_id=f"1v6-{g}")
        if keep_records:
            records.append(record)
        out = Outcome.from_dict(record["outcome"])
        final = _centers_by_phase(record)[-1]
        count = final.get(focus, 0)
        top = max(final.values(), default=0)
        row.games += 1
        if out.kind == "solo" and out.power == focus:
            row.wins += 1
            bucket = "win"
        elif count > 0 and count == top:
            row.most_sc += 1
            bucket = "most_sc"
        elif count > 0:
            row.survived += 1
            bucket = "survived"
        else:
            row.defeated += 1
            bucket = "defeated"
        details.append({"game": g, "power": focus, "bucket": bucket,
                        "centers": count,
                        "decided": out.kind == "solo",
                        "top_powers": sorted(p for p, c in final.items()
                                             if c == top and c > 0)})
    result = {"summary": row.as_dict(), "details": details}
    if keep_records:
        result["records"] = records
    return result


def run_pool(pool: list[str], n_games: int, seed: int = 0,
             rules: dict | None = None, map: MapGraph | None = None,
             make_agent=None, keep_records: bool = False) -> dict:
    """Pooled tournament: each seat of each game drawn independently
    from the pool; TrueSkill updated in game order."""
    from .map import load_standard_map
    from .bots import make_agent as default_make_agent
    if len(pool) < 2:
        raise ValueError("pool needs at least two agents")
    make_agent = make_agent or default_make_agent
    map = map or load_standard_map()
    rng = random.Random(seed)
    ratings: dict[str, Rating] = {spec: Rating() for spec in pool}
    trace: list[dict] = []
    records = []
    for g in range(n_games):
        assignment = {power: pool[rng.randrange(len(pool))] for power in POWERS}
        agents = {power: make_agent(spec, seed=rng.getrandbits(32))
                  for power, spec in assignment.items()}
        record = run_game(map, agents, rules=dict(rules or {}),
                          game_id=f"pool-{g}")
        if keep_records:
            records.append(record)
        ranks = rank_game(record)
        seat_ratings = [ratings[assignment[p]] for p in POWERS]
        seat_ranks = [ranks[p] for p in POWERS]
        updated = rate(seat_ratings, seat_ranks)
        # one agent may hold several seats; average its posteriors
        acc: dict[str, list[Rating]] = {}
        for power, new in zip(POWERS, updated):
            acc.setdefault(assignment[power], []).append(new)
        for spec, posts in acc.items():
            ratings[spec] = Rating(
                sum(r.mu for r in posts) / len(posts),
                sum(r.sigma for r in posts) / len(posts))
        trace.append({"game": g,
                      **{f"mu:{s}": ratings[s].mu for s in pool},
                      **{f"sigma:{s}": ratings[s].sigma for s in pool}})
    result = {"ratings": {s: {"mu": ratings[s].mu, "sigma": ratings[s].sigma}
                          for s in pool},
              "trace": trace}
    if keep_records:
        result["records"] = records
    return result
