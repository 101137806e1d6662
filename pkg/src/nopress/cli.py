"""Command-line surface.

Subcommands: adjudicate, play, tournament, analyze, ingest, encode.
A TOML config file can predefine any long option; explicit flags win.
Every command is deterministic under --seed.
"""

from __future__ import annotations

import argparse
import csv
import glob as globlib
import json
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import NopressError, RecordError
from .map import POWERS, load_standard_map


def _expand_agent_specs(text: str, n_required: int | None = 7) -> list[str]:
    """``random×7`` / ``random*7`` / ``randomx7`` or a comma list."""
    specs: list[str] = []
    for part in text.split(","):
        part = part.strip()
        for sep in ("×", "*"):
            if sep in part:
                spec, _, count = part.rpartition(sep)
                specs.extend([spec] * int(count))
                break
        else:
            if part and part[-1].isdigit() and "x" in part and \
                    part.rsplit("x", 1)[1].isdigit() and not part.startswith(("tcp", "process")):
                spec, count = part.rsplit("x", 1)
                specs.extend([spec] * int(count))
            elif part:
                specs.append(part)
    if n_required and len(specs) == 1:
        specs *= n_required
    if n_required and len(specs) != n_required:
        raise SystemExit(f"need {n_required} agents, got {len(specs)}")
    return specs


def cmd_adjudicate(args) -> int:
    from .scenario import check_scenario, load_scenarios
    map = load_standard_map()
    try:
        cases = load_scenarios(args.scenario)
    except (OSError, ValueError) as e:
        print(f"cannot read scenario file: {e}", file=sys.stderr)
        return 2
    failures = 0
    for case in cases:
        try:
            outcome = check_scenario(map, case)
        except NopressError as e:
            print(f"ERROR {case.get('name', '?')}: {e}", file=sys.stderr)
            failures += 1
            continue
        if case.get("expect"):
            tag = "PASS" if outcome.passed else "FAIL"
            print(f"{tag} {outcome.name}")
            for f in outcome.failures:
                print(f"    {f}")
            failures += not outcome.passed
        else:
            print(f"RAN  {outcome.name}: no changes expected section; "
                  f"resolution computed")
    return 1 if failures else 0


def cmd_play(args) -> int:
    import random
    from .bots import make_agent
    from .engine import run_game

    map = load_standard_map()
    specs = _expand_agent_specs(args.agents)
    rng = random.Random(args.seed)
    os.makedirs(args.out, exist_ok=True)
    rules = {"year_cap": args.year_cap}
    for g in range(args.games):
        agents = {}
        for p, spec in zip(POWERS, specs):
            try:
                agents[p] = make_agent(spec, seed=rng.getrandbits(32))
            except NopressError as e:
                # unreachable endpoint: play on in civil disorder
                from .bots import HoldAgent
                print(f"warning: {p} agent {spec!r} unavailable ({e}); "
                      f"civil disorder", file=sys.stderr)
                agents[p] = HoldAgent()
        record = run_game(map, agents, rules=dict(rules), game_id=f"game-{g}")
        for agent in agents.values():
            if hasattr(agent, "close"):
                agent.close()
        path = os.path.join(args.out, f"game-{g:04d}.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(record, f, sort_keys=True, separators=(",", ":"))
        out = record["outcome"]
        print(f"game-{g:04d}: {len(record['phases'])} phases, "
              f"{out['type']}" + (f" by {out.get('power')}"
                                  if out.get("power") else ""))
    return 0


def cmd_tournament(args) -> int:
    from .tournament import run_1v6, run_pool

    rules = {"year_cap": args.year_cap}
    os.makedirs(args.out, exist_ok=True) if args.out else None
    if args.mode == "1v6":
        specs = _expand_agent_specs(args.agents, n_required=None)
        if len(specs) != 2:
            raise SystemExit("1v6 mode takes exactly two agent specs")
        result = run_1v6(specs[0], specs[1], args.games, seed=args.seed,
                         rules=rules)
        row = result["summary"]
        print(json.dumps(row, indent=2))
        if args.out:
            with open(os.path.join(args.out, "1v6.json"), "w") as f:
                json.dump(result, f, indent=1)
            with open(os.path.join(args.out, "1v6.csv"), "w", newline="") as f:
                w = csv.DictWriter(f, fieldnames=list(row))
                w.writeheader()
                w.writerow(row)
    else:
        specs = _expand_agent_specs(args.agents, n_required=None)
        result = run_pool(specs, args.games, seed=args.seed, rules=rules)
        print(json.dumps(result["ratings"], indent=2))
        if args.out:
            with open(os.path.join(args.out, "pool.json"), "w") as f:
                json.dump({"ratings": result["ratings"]}, f, indent=1)
            trace = result["trace"]
            if trace:
                with open(os.path.join(args.out, "sigma_trace.csv"), "w",
                          newline="") as f:
                    w = csv.DictWriter(f, fieldnames=list(trace[0]))
                    w.writeheader()
                    w.writerows(trace)
    return 0


def _load_records(patterns, skip_bad: bool = False):
    from .engine import load_record
    paths = []
    for pattern in patterns:
        if os.path.isdir(pattern):
            paths.extend(sorted(globlib.glob(os.path.join(pattern, "*.json"))))
        else:
            paths.extend(sorted(globlib.glob(pattern)))
    out = []
    for p in paths:
        try:
            out.append((p, load_record(p)))
        except RecordError as e:
            if not skip_bad:
                raise
            out.append((p, e))
    return out


def cmd_analyze(args) -> int:
    from .analysis import coalition_metrics, dataset_stats

    records = _load_records(args.records)
    if not records:
        print("no records matched", file=sys.stderr)
        return 2
    recs = [r for _, r in records]
    if args.metric == "coalition":
        report = coalition_metrics(recs).as_dict()
    elif args.metric == "stats":
        report = dataset_stats(recs)
    else:
        raise SystemExit(f"unknown metric {args.metric!r}")
    print(json.dumps(report, indent=2))
    if args.out:
        os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
        with open(args.out, "w") as f:
            json.dump(report, f, indent=1)
        if args.metric == "coalition":
            # summary table: variant, X-support-ratio, Eff-X-support-ratio
            base, _ = os.path.splitext(args.out)
            with open(base + ".csv", "w", newline="") as f:
                w = csv.writer(f)
                w.writerow(["variant", "x_support_ratio",
                            "eff_x_support_ratio"])
                w.writerow([args.label, report["x_support_ratio"],
                            report["eff_x_support_ratio"]])
    return 0


def cmd_ingest(args) -> int:
    from .engine import replay

    records = _load_records(args.records, skip_bad=True)
    if not records:
        print("no records matched", file=sys.stderr)
        return 2
    bad = 0
    for path, record in records:
        try:
            if isinstance(record, RecordError):
                raise record
            _, notes = replay(record)
        except RecordError as e:
            bad += 1
            print(f"REJECT {path}: {e}"
                  + (f" (phase {e.divergent_phase})" if e.divergent_phase else ""))
            continue
        print(f"OK     {path}: {len(record['phases'])} phases, "
              f"{len(notes)} divergence note(s)")
        for note in notes:
            print(f"       {note}")
    return 1 if bad else 0


def cmd_encode(args) -> int:
    from .export import export_records

    records = _load_records(args.records)
    if not records:
        print("no records matched", file=sys.stderr)
        return 2
    meta = export_records([r for _, r in records], args.out)
    print(json.dumps(meta, indent=2))
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="nopress",
        description="No Press Diplomacy engine: adjudication, self-play, "
                    "tournaments, analysis, training-data export.")
    parser.add_argument("--config", help="TOML config file; flags win")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = []

    p = sub.add_parser("adjudicate", help="run scenario file(s)")
    subparsers.append(p)
    p.add_argument("scenario")
    p.set_defaults(func=cmd_adjudicate)

    p = sub.add_parser("play", help="batch games between agents")
    subparsers.append(p)
    p.add_argument("--agents", default="random×7",
                   help="comma list or spec×7 (random, greedy, dumbbot, "
                        "hold, process:<cmd>, tcp:host:port)")
    p.add_argument("-n", "--games", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--year-cap", type=int, default=1935)
    p.add_argument("--out", default="records")
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("tournament", help="1v6 or pooled TrueSkill")
    subparsers.append(p)
    p.add_argument("--mode", choices=("1v6", "pool"), required=True)
    p.add_argument("--agents", required=True)
    p.add_argument("-n", "--games", type=int, default=7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--year-cap", type=int, default=1935)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tournament)

    p = sub.add_parser("analyze", help="coalition metrics / dataset stats")
    subparsers.append(p)
    p.add_argument("--metric", choices=("coalition", "stats"),
                   default="coalition")
    p.add_argument("--label", default="records",
                   help="variant name in the coalition summary table")
    p.add_argument("records", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("ingest", help="validate and replay record files")
    subparsers.append(p)
    p.add_argument("records", nargs="+")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("encode", help="export tensors for model training")
    subparsers.append(p)
    p.add_argument("records", nargs="+")
    p.add_argument("--out", default="dataset.npz")
    p.set_defaults(func=cmd_encode)
    return parser, subparsers


def main(argv=None) -> int:
    parser, subparsers = _build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # config file supplies defaults; explicit flags win
    if "--config" in argv:
        idx = argv.index("--config")
        with open(argv[idx + 1], "rb") as f:
            config = tomllib.load(f)
        flat = {}
        for k, v in config.items():
            if isinstance(v, dict):
                for k2, v2 in v.items():
                    flat[k2.replace("-", "_")] = v2
            else:
                flat[k.replace("-", "_")] = v
        for p in [parser, *subparsers]:
            known = {a.dest for a in p._actions}
            p.set_defaults(**{k: v for k, v in flat.items() if k in known})
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NopressError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
