"""Scenario files: one-phase adjudication cases with expected outcomes.

Format (JSON object, or a list of them per file)::

    {
      "name": "...", "description": "...",
      "phase": "S1901M",
      "units": {"FRANCE": ["A PAR", ...], ...},
      "centers": {"FRANCE": ["PAR", ...], ...},        # optional
      "dislodged": {"FRANCE": [["A BUR", "MUN"]], ...},# optional, retreat
      "standoffs": ["PIC"],                            # optional
      "orders": {"FRANCE": ["A PAR - BUR", ...], ...},
      "expect": {
        "results":  {"A PAR - BUR": "ok" | "fail" | "fail:<reason>"},
        "invalid":  ["A PAR - MUN", ...],
        "dislodged": ["A BUR", ...],
        "standoffs": ["BUR", ...],
        "positions": {"FRANCE": ["A BUR", ...], ...}
      }
    }

Every ``expect`` key is optional; present keys are checked exactly
(save that a bare ``fail`` matches any failure reason). The conformance
corpus shipped under ``nopress/data/corpus/`` uses this format, and
``nopress adjudicate`` runs it from the command line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .adjudicator import (resolve_adjustments, resolve_movement,
                          resolve_retreats)
from .errors import RecordError
from .legal import validate
from .map import MapGraph
from .orders import Order, Waive, format_order, parse_order
from .state import MOVEMENT, RETREAT, GameState, state_from_dict


@dataclass
class ScenarioOutcome:
    name: str
    passed: bool
    failures: list[str]


def load_scenarios(path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    return data if isinstance(data, list) else [data]


def state_from_scenario(case: dict) -> GameState:
    return state_from_dict({
        "phase": case["phase"],
        "units": case.get("units", {}),
        "centers": case.get("centers", {}),
        "dislodged": case.get("dislodged", {}),
        "standoffs": case.get("standoffs", []),
    })


def run_phase(map: MapGraph, state: GameState,
              orders_by_power: dict[str, list[Order]]):
    """Validate, fill movement holds, and resolve one phase.

    Returns (resolution, effective orders by power, judgments by power).
    """
    from .orders import Hold
    from .legal import unit_ref

    effective: dict[str, list[Order]] = {}
    judgments: dict[str, list] = {}
    for power, orders in orders_by_power.items():
        js = validate(map, state, power, orders)
        judgments[power] = js
        effective[power] = [j.effective for j in js if j.effective is not None]

    kind = state.phase.kind
    if kind == MOVEMENT:
        ordered = {o.unit.loc for os in effective.values() for o in os
                   if not isinstance(o, Waive)}
        for u in state.units:
            if u.loc not in ordered:
                effective.setdefault(u.power, []).append(Hold(unit_ref(u)))
        resolution = resolve_movement(map, state, effective)
    elif kind == RETREAT:
        resolution = resolve_retreats(map, state, effective)
    else:
        resolution = resolve_adjustments(map, state, effective)
    return resolution, effective, judgments


def check_scenario(map: MapGraph, case: dict) -> ScenarioOutcome:
    name = case.get("name", "?")
    try:
        state = state_from_scenario(case)
        orders = {p: [parse_order(t) for t in ts]
                  for p, ts in case.get("orders", {}).items()}
    except Exception as e:
        raise RecordError(f"scenario {name!r} is malformed: {e}") from e

    failures: list[str] = []
    resolution, effective, judgments = run_phase(map, state, orders)
    expect = case.get("expect", {})

    # submitted text -> verdict, via the canonicalized/effective order
    verdict_by_text: dict[str, str] = {}
    invalid = []
    for power, js in judgments.items():
        for j in js:
            text = format_order(j.order)
            if not j.valid:
                invalid.append(j.order)
                verdict_by_text[text] = "invalid"
            elif j.effective in resolution.verdicts:
                verdict_by_text[text] = resolution.verdicts[j.effective].text

    for text, want in expect.get("results", {}).items():
        got = verdict_by_text.get(format_order(parse_order(text)))
        if got is None:
            failures.append(f"results[{text}]: no verdict recorded")
        elif want == "fail":
            if not got.startswith("fail"):
                failures.append(f"results[{text}]: want any failure, got {got}")
        elif got != want:
            failures.append(f"results[{text}]: want {want}, got {got}")

    if "invalid" in expect:
        want_invalid = {format_order(parse_order(t)) for t in expect["invalid"]}
        got_invalid = {format_order(o) for o in invalid}
        if want_invalid != got_invalid:
            failures.append(f"invalid: want {sorted(want_invalid)}, "
                            f"got {sorted(got_invalid)}")

    if "dislodged" in expect:
        want_d = set(expect["dislodged"])
        got_d = {d.unit.text for d in resolution.dislodgements}
        if want_d != got_d:
            failures.append(f"dislodged: want {sorted(want_d)}, got {sorted(got_d)}")

    if "standoffs" in expect:
        if set(expect["standoffs"]) != set(resolution.standoffs):
            failures.append(f"standoffs: want {sorted(expect['standoffs'])}, "
                            f"got {sorted(resolution.standoffs)}")

    if "positions" in expect:
        got_pos: dict[str, set[str]] = {}
        for u, loc in resolution.resulting_positions.items():
            got_pos.setdefault(u.power, set()).add(f"{u.kind} {loc}")
        for power, texts in expect["positions"].items():
            if set(texts) != got_pos.get(power, set()):
                failures.append(
                    f"positions[{power}]: want {sorted(texts)}, "
                    f"got {sorted(got_pos.get(power, set()))}")

    return ScenarioOutcome(name, not failures, failures)
