"""Run a trained policy as a wire-protocol agent over stdio.

Usage: ``python -m nopress_model.agent --checkpoint model.npz
[--mode greedy|sample] [--seed N]``. The engine spawns this with
``--agents "process:python -m nopress_model.agent ..."``.
"""

from __future__ import annotations

import argparse
import json
import sys

import torch

from .infer import decide
from .network import load_checkpoint


def serve(policy, mode: str = "greedy", seed: int = 0,
          stdin=None, stdout=None) -> None:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    generator = torch.Generator().manual_seed(seed)

    def reply(msg):
        stdout.write(json.dumps(msg, sort_keys=True) + "\n")
        stdout.flush()

    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            reply({"type": "error", "message": "bad json"})
            continue
        kind = msg.get("type")
        if kind == "hello":
            reply({"type": "hello", "protocol": 1, "name": "nopress-model"})
        elif kind == "request_orders":
            try:
                texts, *_ = decide(policy, msg, mode=mode,
                                   generator=generator)
                reply({"type": "orders", "orders": texts})
            except Exception as e:  # noqa: BLE001 - must answer something
                reply({"type": "error", "message": str(e)})
        elif kind == "bye":
            break


def main(argv=None) -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--mode", choices=("greedy", "sample"),
                        default="greedy")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    policy = load_checkpoint(args.checkpoint)
    serve(policy, mode=args.mode, seed=args.seed)
    return 0


if __name__ == "__main__":
    sys.exit(main())
