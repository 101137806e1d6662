"""Rate the built-in bots with a pooled TrueSkill tournament and run a
small 1-vs-6 table.

Run: python demos/03_tournament_trueskill.py   (about a minute)
"""

from nopress import run_1v6, run_pool

pool = ["dumbbot", "greedy", "random", "hold"]
result = run_pool(pool, n_games=120, seed=7, rules={"year_cap": 1905})
print("pooled TrueSkill after 120 games:")
for spec, r in sorted(result["ratings"].items(),
                      key=lambda kv: -kv[1]["mu"]):
    print(f"  {spec:8s} mu {r['mu']:6.2f}  sigma {r['sigma']:5.2f}  "
          f"(mu - 3 sigma = {r['mu'] - 3 * r['sigma']:6.2f})")

table = run_1v6("dumbbot", "random", n_games=21, seed=3,
                rules={"year_cap": 1906})
print("\n1 dumbbot vs 6 randoms:")
for key, value in table["summary"].items():
    print(f"  {key:14s} {value}")
