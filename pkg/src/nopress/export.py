"""Training-data export: board/prev-order tensors, legality indices,
and gold orders for every (phase, power) of a set of game records.

One self-describing ``.npz`` holds the whole dataset::

    layout          [TENSOR_LAYOUT_VERSION]
    vocab           (V,)   order text per vocabulary index
    boards          (P, 81, 35) uint8     one per recorded phase
    prevs           (P, 81, 40) uint8
    phase_season    (P,)   int8           0 spring, 1 fall, 2 winter
    sample_phase    (R,)   int32          row -> phase index
    sample_power    (R,)   int8           row -> power index (POWERS order)
    sample_game     (R,)   int32          row -> game index
    sample_offsets  (R+1,) int64          row -> decode-step span
    step_loc        (L,)   int32          location row (81-index) per step
    step_gold       (L,)   int32          gold vocabulary index per step
    legal_offsets   (L+1,) int64          step -> span into legal_indices
    legal_indices   (K,)   int32
    final_scores    (G, 7) float32        terminal proportional score

Decode steps are stored in the decoder's location ordering.
"""

from __future__ import annotations

import numpy as np

from .engine import Game, Outcome, score_outcome, step
from .errors import RecordError
from .features import (TENSOR_LAYOUT_VERSION, decode_ordering, encode_board,
                       encode_prev_orders, order_vocabulary)
from .legal import all_legal_orders
from .map import POWERS, MapGraph, load_standard_map
from .orders import acting_loc, format_order, parse_order
from .state import units_requiring_orders

_SEASON_IDX = {"S": 0, "F": 1, "W": 2}


def export_records(records: list[dict], out_path: str,
                   map: MapGraph | None = None) -> dict:
    """Encode every phase of every record into one dataset file."""
    map = map or load_standard_map()
    vocab = order_vocabulary(map)
    power_idx = {p: i for i, p in enumerate(POWERS)}

    boards, prevs, seasons = [], [], []
    sample_phase, sample_power, sample_game, sample_offsets = [], [], [], [0]
    step_loc, step_gold = [], []
    legal_offsets, legal_indices = [0], []
    final_scores = np.zeros((len(records), len(POWERS)), dtype=np.float32)

    for g, record in enumerate(records):
        game = Game(map, dict(record["rules"]))
        out = Outcome.from_dict(record["outcome"])
        for entry in record["phases"]:
            state = game.state
            if state.phase.code != entry["name"]:
                raise RecordError(f"phase mismatch at {entry['name']}")
            orders = {p: [parse_order(t) for t in ts]
                      for p, ts in entry["orders"].items()}

            phase_index = len(boards)
            boards.append(
                (encode_board(map, state) > 0.5).astype(np.uint8))
            prevs.append(
                (encode_prev_orders(map, game.last_movement, state) > 0.5)
                .astype(np.uint8))
            seasons.append(_SEASON_IDX[state.phase.season])

            legal = all_legal_orders(map, state)
            step(game, orders)  # fills game.phases with effective results

            # gold per orderable location from the validated results
            for power in POWERS:
                locs = units_requiring_orders(state, power, map)
                if not locs:
                    continue
                chosen: dict[str, int] = {}
                for text, res in entry.get("results", {}).get(power, {}).items():
                    if res == "invalid":
                        continue
                    order = parse_order(text)
                    loc = acting_loc(order)
                    if loc is None:
                        continue
                    canon = format_order(order)
                    idx = vocab.index.get(canon)
                    if idx is None:
                        idx = vocab.index.get(canon + " VIA")
                    if idx is not None:
                        chosen[loc] = idx
                ordered = decode_ordering(map, locs)
                sample_phase.append(phase_index)
                sample_power.append(power_idx[power])
                sample_game.append(g)
                for loc in ordered:
                    gold = chosen.get(loc)
                    if gold is None:
                        # unordered: movement holds; winter sites waive
                        if state.phase.kind == "M":
                            unit = next(u for u in state.units if u.loc == loc)
                            gold = vocab.index[f"{unit.kind} {unit.loc} H"]
                        elif state.phase.kind == "R":
                            unit = next(d.unit for d in state.dislodged
                                        if d.unit.loc == loc)
                            gold = vocab.index[f"{unit.kind} {unit.loc} D"]
                        else:
                            gold = vocab.waive_index
                    step_loc.append(map.index[loc])
                    step_gold.append(gold)
                    ls = sorted(vocab.index[format_order(o)]
                                for o in legal.get(loc, ()))
                    legal_indices.extend(ls)
                    legal_offsets.append(len(legal_indices))
                sample_offsets.append(len(step_loc))
        ranks_score = score_outcome(out, game.state, "sc_count") \
            if out.kind != "ongoing" else {p: 0.0 for p in POWERS}
        for p, s in ranks_score.items():
            final_scores[g, power_idx[p]] = s

    from .map import normalized_adjacency

    data = {
        "layout": np.array([TENSOR_LAYOUT_VERSION]),
        "vocab": np.array(vocab.orders),
        "locations": np.array(map.names),
        "powers": np.array(POWERS),
        "supply_centers": np.array(sorted(map.supply_centers)),
        "adjacency": normalized_adjacency(map).astype(np.float32),
        "boards": np.stack(boards) if boards else np.zeros((0, 81, 35), np.uint8),
        "prevs": np.stack(prevs) if prevs else np.zeros((0, 81, 40), np.uint8),
        "phase_season": np.array(seasons, dtype=np.int8),
        "sample_phase": np.array(sample_phase, dtype=np.int32),
        "sample_power": np.array(sample_power, dtype=np.int8),
        "sample_game": np.array(sample_game, dtype=np.int32),
        "sample_offsets": np.array(sample_offsets, dtype=np.int64),
        "step_loc": np.array(step_loc, dtype=np.int32),
        "step_gold": np.array(step_gold, dtype=np.int32),
        "legal_offsets": np.array(legal_offsets, dtype=np.int64),
        "legal_indices": np.array(legal_indices, dtype=np.int32),
        "final_scores": final_scores,
    }
    np.savez_compressed(out_path, **data)
    return {"path": str(out_path), "phases": len(boards),
            "samples": len(sample_phase), "steps": len(step_loc),
            "vocab": len(vocab), "games": len(records)}
