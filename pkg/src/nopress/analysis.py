"""Coalition metrics, order-prediction accuracy, dataset statistics.

Cross-power support (X-support) is the cooperation signal: a support
order whose beneficiary belongs to another power. An X-support is
*effective* when it succeeded and removing it flips the supported
attack to a failure (or gets the defended unit dislodged).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .adjudicator import counterfactual_without
from .engine import replay
from .errors import RecordError
from .map import MapGraph, POWERS, load_standard_map
from .orders import (Hold, Move, Order, SupportHold, SupportMove,
                     format_order, parse_order)
from .scenario import run_phase
from .state import MOVEMENT, GameState


@dataclass
class CoalitionReport:
    supports: int = 0
    x_supports: int = 0
    effective_x_supports: int = 0
    games: int = 0
    skipped: int = 0

    @property
    def x_support_ratio(self) -> float | None:
        return self.x_supports / self.supports if self.supports else None

    @property
    def eff_x_support_ratio(self) -> float | None:
        return (self.effective_x_supports / self.x_supports
                if self.x_supports else None)

    def as_dict(self) -> dict:
        return {
            "games": self.games, "skipped": self.skipped,
            "supports": self.supports, "x_supports": self.x_supports,
            "effective_x_supports": self.effective_x_supports,
            "x_support_ratio": self.x_support_ratio,
            "eff_x_support_ratio": self.eff_x_support_ratio,
        }


def _owner_of_unit(map: MapGraph, state: GameState, loc: str) -> str | None:
    u = state.unit_at(map, loc)
    return u.power if u is not None else None


def coalition_phase(map: MapGraph, state: GameState,
                    orders_by_power: dict[str, list[Order]]) -> tuple[int, int, int]:
    """Count (supports, x_supports, effective_x_supports) in one
    movement phase; pure, replays nothing."""
    resolution, effective, _ = run_phase(map, state, orders_by_power)
    supports = x_supports = effective_x = 0
    for power, orders in effective.items():
        for o in orders:
            if not isinstance(o, (SupportHold, SupportMove)):
                continue
            supports += 1
            target_loc = o.moving.loc if isinstance(o, SupportMove) else o.target.loc
            beneficiary = _owner_of_unit(map, state, target_loc)
            if beneficiary is None or beneficiary == power:
                continue
            x_supports += 1
            if not resolution.verdicts[o].success:
                continue
            # drop the support: does the supported attack now fail, or the
            # defended unit now fall?
            without = counterfactual_without(map, state, effective, o)
            if isinstance(o, SupportMove):
                supported = next(
                    (m for os in effective.values() for m in os
                     if isinstance(m, Move) and m.unit == o.moving
                     and map.province_of(m.dest) == o.dest), None)
                if supported is None:
                    continue
                if (resolution.verdicts[supported].success
                        and not without.verdicts[supported].success):
                    effective_x += 1
            else:
                unit = state.unit_at(map, o.target.loc)
                was_dislodged = any(d.unit == unit
                                    for d in resolution.dislodgements)
                now_dislodged = any(d.unit == unit
                                    for d in without.dislodgements)
                if not was_dislodged and now_dislodged:
                    effective_x += 1
    return supports, x_supports, effective_x


def coalition_metrics(records, map: MapGraph | None = None) -> CoalitionReport:
    """Aggregate coalition counts over replayable game records."""
    map = map or load_standard_map()
    report = CoalitionReport()
    for record in records:
        try:
            phases = _movement_phases(record, map)
        except RecordError:
            report.skipped += 1
            continue
        report.games += 1
        for state, orders in phases:
            s, x, e = coalition_phase(map, state, orders)
            report.supports += s
            report.x_supports += x
            report.effective_x_supports += e
    return report


def _movement_phases(record: dict, map: MapGraph):
    """(state, submitted orders) for each movement phase of a record."""
    from .engine import Game, step
    game = Game(map, dict(record["rules"]))
    out = []
    for entry in record["phases"]:
        state = game.state
        if state.phase.code != entry["name"]:
            raise RecordError(f"phase mismatch at {entry['name']}")
        orders = {p: [parse_order(t) for t in ts]
                  for p, ts in entry["orders"].items()}
        if state.phase.kind == MOVEMENT:
            out.append((state, orders))
        step(game, orders)
        from .state import state_to_dict
        if state_to_dict(game.state) != entry["state"]:
            raise RecordError(f"replay diverged at {entry['name']}",
                              divergent_phase=entry["name"])
    return out


# -- prediction accuracy ----------------------------------------------------------


@dataclass
class AccuracyReport:
    unit_order_total: int = 0
    unit_order_hits: int = 0
    sets_total: int = 0
    sets_hits: int = 0
    #: decode position (1-based) -> [support hits, support total]
    support_by_position: dict[int, list[int]] = field(default_factory=dict)

    @property
    def per_unit_accuracy(self) -> float:
        return (self.unit_order_hits / self.unit_order_total
                if self.unit_order_total else 0.0)

    @property
    def all_orders_accuracy(self) -> float:
        return self.sets_hits / self.sets_total if self.sets_total else 0.0

    def support_accuracy(self, position: int) -> float | None:
        entry = self.support_by_position.get(position)
        return entry[0] / entry[1] if entry and entry[1] else None

    def as_dict(self) -> dict:
        return {
            "per_unit_accuracy": self.per_unit_accuracy,
            "all_orders_accuracy": self.all_orders_accuracy,
            "support_by_position": {
                str(k): {"hits": v[0], "total": v[1]}
                for k, v in sorted(self.support_by_position.items())},
        }


def accuracy_metrics(predictions, gold) -> AccuracyReport:
    """Compare predicted orders to gold orders.

    Both arguments are sequences of (power, ordered location list,
    predicted/gold order text per location); alignment is by sequence
    position and location list. Supports are bucketed by the unit's
    1-based index in the decode ordering.
    """
    report = AccuracyReport()
    if len(predictions) != len(gold):
        raise ValueError("prediction/gold length mismatch")
    for pred, goldrow in zip(predictions, gold):
        p_power, p_locs, p_orders = pred
        g_power, g_locs, g_orders = goldrow
        if p_power != g_power or list(p_locs) != list(g_locs):
            raise ValueError("misaligned prediction/gold rows")
        all_hit = True
        for pos, (loc, po, go) in enumerate(zip(p_locs, p_orders, g_orders),
                                            start=1):
            hit = _canonical(po) == _canonical(go)
            report.unit_order_total += 1
            report.unit_order_hits += hit
            all_hit &= hit
            if _is_support(go):
                bucket = report.support_by_position.setdefault(pos, [0, 0])
                bucket[1] += 1
                bucket[0] += hit
        report.sets_total += 1
        report.sets_hits += all_hit
    return report


def _canonical(order) -> str:
    if isinstance(order, str):
        return format_order(parse_order(order))
    return format_order(order)


def _is_support(order) -> bool:
    if isinstance(order, str):
        order = parse_order(order)
    return isinstance(order, (SupportHold, SupportMove))


# -- dataset statistics -------------------------------------------------------------


def dataset_stats(records) -> dict:
    """Per-power win/draw/defeat rates and the survivor cross-table."""
    stats = {p: {"games": 0, "win": 0, "draw": 0, "defeated": 0}
             for p in POWERS}
    # survival[p][q]: of games p won or drew, how often q survived
    survival = {p: {q: [0, 0] for q in POWERS} for p in POWERS}
    for record in records:
        out = record["outcome"]
        if out.get("type") == "ongoing":
            continue
        final = record["phases"][-1]["state"].get("centers", {})
        alive = {p for p in POWERS if final.get(p)}
        winners = {out["power"]} if out["type"] == "solo" else set()
        drawers = set(out.get("survivors", ())) if out["type"] == "draw" else set()
        for p in POWERS:
            stats[p]["games"] += 1
            if p in winners:
                stats[p]["win"] += 1
            elif p in drawers:
                stats[p]["draw"] += 1
            elif p not in alive:
                stats[p]["defeated"] += 1
            if p in winners or p in drawers:
                for q in POWERS:
                    survival[p][q][1] += 1
                    survival[p][q][0] += q in alive
    table = {}
    for p in POWERS:
        n = max(stats[p]["games"], 1)
        table[p] = {
            "win%": 100.0 * stats[p]["win"] / n,
            "draw%": 100.0 * stats[p]["draw"] / n,
            "defeated%": 100.0 * stats[p]["defeated"] / n,
            "survival": {q: (100.0 * survival[p][q][0] / survival[p][q][1]
                             if survival[p][q][1] else None)
                         for q in POWERS},
        }
    return table
