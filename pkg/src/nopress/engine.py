"""Full-game loop, termination, scoring, rewards, and game records.

A record replays bit-exactly: feeding its orders back through
validate/resolve/apply reproduces every stored state snapshot. Records
are versioned JSON with the field layout::

    {"map": ..., "rules": {...},
     "phases": [{"name": "S1901M",
                 "orders": {"FRANCE": ["A PAR - BUR", ...], ...},
                 "results": {"FRANCE": {"A PAR - BUR": "ok", ...}, ...},
                 "state": {...}}, ...],
     "outcome": {"type": "solo"|"draw"|"ongoing", ...}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .adjudicator import apply as apply_resolution
from .errors import RecordError, StateError
from .map import MapGraph, POWERS, load_standard_map
from .orders import Order, Waive, format_order, parse_order
from .scenario import run_phase
from .state import MOVEMENT, GameState, initial_state, state_to_dict

RECORD_VERSION = 1
DEFAULT_YEAR_CAP = 1935
SOLO_CENTERS = 18
TOTAL_CENTERS = 34


@dataclass(frozen=True)
class Outcome:
    kind: str                      # "ongoing" | "solo" | "draw"
    power: str | None = None       # solo winner
    survivors: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        d = {"type": self.kind}
        if self.kind == "solo":
            d["power"] = self.power
        if self.kind == "draw":
            d["survivors"] = sorted(self.survivors)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Outcome":
        return cls(d["type"], d.get("power"),
                   tuple(d.get("survivors", ())))


ONGOING = Outcome("ongoing")


@dataclass
class Game:
    """One game in progress plus its growing record."""

    map: MapGraph
    rules: dict = field(default_factory=dict)
    state: GameState = None
    phases: list[dict] = field(default_factory=list)
    #: effective orders of the last movement phase, for observations
    last_movement: dict[str, list[Order]] = field(default_factory=dict)

    def __post_init__(self):
        if self.state is None:
            self.state = initial_state(self.map)
        self.rules.setdefault("year_cap", DEFAULT_YEAR_CAP)

    @property
    def year_cap(self) -> int:
        return self.rules["year_cap"]


def step(game: Game, orders_by_power: dict[str, list[Order]]) -> Game:
    """Play one phase: validate, resolve, apply, record.

    Powers may be missing from ``orders_by_power``; their units hold.
    Invalid orders degrade per *check* semantics and are recorded with
    an ``invalid`` result.
    """
    state = game.state
    resolution, effective, judgments = run_phase(game.map, state, orders_by_power)

    orders_json: dict[str, list[str]] = {}
    results_json: dict[str, dict[str, str]] = {}
    for power in sorted(judgments):
        js = judgments[power]
        if not js:
            continue
        orders_json[power] = [format_order(j.order) for j in js]
        res: dict[str, str] = {}
        for j in js:
            text = format_order(j.order)
            if not j.valid:
                res[text] = "invalid"
            elif j.effective in resolution.verdicts:
                res[text] = resolution.verdicts[j.effective].text
            else:
                res[text] = "ok"
        results_json[power] = res

    nxt = apply_resolution(state, resolution, game.map)
    game.phases.append({
        "name": state.phase.code,
        "orders": orders_json,
        "results": results_json,
        "state": state_to_dict(nxt),
    })
    if state.phase.kind == MOVEMENT:
        game.last_movement = {
            p: [o for o in os if not isinstance(o, Waive)]
            for p, os in effective.items()}
    game.state = nxt
    return game


def outcome(game: Game) -> Outcome:
    """Solo once a power owns 18+ centers (ownership only changes at
    Winter boundaries); automatic draw among surviving powers once the
    year cap is passed."""
    state = game.state
    for power in POWERS:
        if len(state.owned_centers(power)) >= SOLO_CENTERS:
            return Outcome("solo", power)
    if state.phase.year > game.year_cap:
        survivors = tuple(p for p in POWERS if state.owned_centers(p))
        return Outcome("draw", None, survivors)
    return ONGOING


def score(game: Game, system: str = "sc_count") -> dict[str, float]:
    """Final points. ``draw_based``: equal split among survivors;
    ``sc_count``: proportional to supply centers among survivors."""
    out = outcome(game)
    if out.kind == "ongoing":
        raise StateError("cannot score an unfinished game")
    return score_outcome(out, game.state, system)


def score_outcome(out: Outcome, state: GameState,
                  system: str = "sc_count") -> dict[str, float]:
    scores = {p: 0.0 for p in POWERS}
    if out.kind == "solo":
        scores[out.power] = float(TOTAL_CENTERS)
        return scores
    survivors = [p for p in POWERS if state.owned_centers(p)]
    if not survivors:
        return scores
    if system == "draw_based":
        for p in survivors:
            scores[p] = TOTAL_CENTERS / len(survivors)
    elif system == "sc_count":
        total = sum(len(state.owned_centers(p)) for p in survivors)
        for p in survivors:
            scores[p] = TOTAL_CENTERS * len(state.owned_centers(p)) / total
    else:
        raise ValueError(f"unknown scoring system {system!r}")
    return scores


def occupancy_control(map: MapGraph, state: GameState, power: str) -> int:
    """Supply centers controlled right now: a unit parked on a center
    claims it immediately, otherwise the recorded owner keeps it."""
    occupier = {map.province_of(u.loc): u.power for u in state.units}
    count = 0
    for sc in map.supply_centers:
        holder = occupier.get(sc, state.sc_ownership.get(sc))
        if holder == power:
            count += 1
    return count


def reward(map: MapGraph, prev_state: GameState, state: GameState,
           power: str, terminal: bool, final_outcome: Outcome | None) -> float:
    """Per-phase shaped reward: average of the occupancy-based center
    delta (updates every phase, not just Winter) and, on terminal steps,
    the proportional terminal score."""
    local = (occupancy_control(map, state, power)
             - occupancy_control(map, prev_state, power))
    terminal_part = 0.0
    if terminal:
        if final_outcome is None:
            raise ValueError("terminal reward needs the final outcome")
        terminal_part = score_outcome(final_outcome, state, "sc_count")[power]
    return (local + terminal_part) / 2.0


# -- records --------------------------------------------------------------------


def record_to_dict(game: Game, out: Outcome | None = None) -> dict:
    return {
        "version": RECORD_VERSION,
        "map": game.map.name,
        "rules": dict(sorted(game.rules.items())),
        "phases": game.phases,
        "outcome": (out or outcome(game)).to_dict(),
    }


def record_to_json(game: Game, out: Outcome | None = None) -> str:
    return json.dumps(record_to_dict(game, out), sort_keys=True,
                      separators=(",", ":"))


def save_record(game: Game, path, out: Outcome | None = None) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(record_to_json(game, out))
        f.write("\n")


def load_record(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise RecordError(f"cannot read record {path}: {e}") from e
    if not isinstance(data, dict):
        raise RecordError(f"record {path} is not a JSON object")
    for key in ("map", "rules", "phases", "outcome"):
        if key not in data:
            raise RecordError(f"record missing field {key!r}")
    return data


def replay(record: dict, map: MapGraph | None = None,
           collect_divergences: bool = False):
    """Re-run a record through the engine.

    Returns ``(game, divergence_notes)``. Any invalid order found during
    re-validation becomes a note. A state snapshot mismatch means the
    record does not replay and raises RecordError naming the phase
    (the stored snapshot governs; we never silently continue).
    """
    map = map or load_standard_map()
    if record["map"] != map.name:
        raise RecordError(f"record is for map {record['map']!r}")
    game = Game(map, dict(record["rules"]))
    notes: list[str] = []
    for entry in record["phases"]:
        expected_phase = entry["name"]
        if game.state.phase.code != expected_phase:
            raise RecordError(
                f"phase mismatch: engine at {game.state.phase.code}, "
                f"record at {expected_phase}", divergent_phase=expected_phase)
        orders = {p: [parse_order(t) for t in ts]
                  for p, ts in entry["orders"].items()}
        for power, results in entry.get("results", {}).items():
            for text, res in results.items():
                if res == "invalid":
                    notes.append(f"{expected_phase} {power}: invalid order {text}")
        step(game, orders)
        got = state_to_dict(game.state)
        if got != entry["state"]:
            raise RecordError(
                f"replay diverged at {expected_phase}",
                divergent_phase=expected_phase)
    return game, notes


def run_games(map: MapGraph, game_specs: list[dict]) -> list[dict]:
    """Batch-run contract: submit N game specs, collect N records.

    Each spec: ``{"agents": {POWER: agent}, "rules": {...}, "id": ...}``.
    Games are independent; this reference scheduler runs them in order,
    so results are deterministic for seeded agents.
    """
    return [run_game(map, spec["agents"], spec.get("rules"),
                     spec.get("id", f"game-{i}"))
            for i, spec in enumerate(game_specs)]


def run_game(map: MapGraph, agents: dict[str, "object"],
             rules: dict | None = None, game_id: str = "game") -> dict:
    """Play a full game with one agent per power; returns the record dict.

    Agents expose ``decide(observation) -> AgentDecision``. Agent
    failures degrade to civil disorder for that phase.
    """
    from .bots import observe, AgentDecision

    game = Game(map, dict(rules or {}))
    guard = 0
    while outcome(game).kind == "ongoing":
        orders: dict[str, list[Order]] = {}
        from .legal import all_legal_orders
        legal = all_legal_orders(map, game.state)
        for power in POWERS:
            agent = agents.get(power)
            if agent is None:
                continue
            obs = observe(game, power, legal)
            if not obs.legal:
                continue
            try:
                decision = agent.decide(obs)
            except Exception:
                decision = AgentDecision([])  # civil disorder
            orders[power] = list(decision.orders)
        step(game, orders)
        guard += 1
        if guard > 12 * (game.year_cap - 1900):
            raise StateError("game failed to terminate")
    return record_to_dict(game)
