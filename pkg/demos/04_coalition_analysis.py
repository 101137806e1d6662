"""Cross-power support analysis over a batch of bot games.

Run: python demos/04_coalition_analysis.py
"""

from nopress import POWERS, load_standard_map, run_game
from nopress.analysis import coalition_metrics, dataset_stats
from nopress.bots import RandomAgent

map = load_standard_map()
records = []
for g in range(40):
    agents = {p: RandomAgent(seed=g * 7 + i) for i, p in enumerate(POWERS)}
    records.append(run_game(map, agents, rules={"year_cap": 1904}))

report = coalition_metrics(records, map)
print("coalition report over", report.games, "random games")
print(f"  supports:             {report.supports}")
print(f"  cross-power supports: {report.x_supports}")
print(f"  effective X-supports: {report.effective_x_supports}")
print(f"  X-support-ratio:      {report.x_support_ratio:.3f}")
if report.eff_x_support_ratio is not None:
    print(f"  Eff-X-support-ratio:  {report.eff_x_support_ratio:.3f}")

stats = dataset_stats(records)
print("\nper-power outcomes (win/draw/defeated %):")
for p in POWERS:
    row = stats[p]
    print(f"  {p:8s} {row['win%']:5.1f} {row['draw%']:6.1f} "
          f"{row['defeated%']:6.1f}")
