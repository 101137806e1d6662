"""Play a full bot game, save the record, replay it, and score it.

Run: python demos/02_full_game.py
"""

import json
import tempfile

from nopress import POWERS, load_standard_map, replay, run_game, score
from nopress.bots import DumbbotAgent
from nopress.engine import Game, Outcome, score_outcome
from nopress.state import state_from_dict

map = load_standard_map()
agents = {p: DumbbotAgent(seed=i) for i, p in enumerate(POWERS)}
record = run_game(map, agents, rules={"year_cap": 1910})

print(f"phases played: {len(record['phases'])}")
print(f"outcome: {record['outcome']}")
final = state_from_dict(record["phases"][-1]["state"])
for power in POWERS:
    centers = sorted(final.owned_centers(power))
    print(f"  {power:8s} {len(centers):2d} centers  {' '.join(centers)}")

out = Outcome.from_dict(record["outcome"])
print("\nscores (proportional):",
      {p: round(s, 1) for p, s in
       score_outcome(out, final, "sc_count").items() if s})
print("scores (draw-based):  ",
      {p: round(s, 1) for p, s in
       score_outcome(out, final, "draw_based").items() if s})

# Records replay bit-exactly.
game, notes = replay(record)
print(f"\nreplayed {len(game.phases)} phases, {len(notes)} divergence notes")
with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
    json.dump(record, f)
    print(f"record written to {f.name}")
