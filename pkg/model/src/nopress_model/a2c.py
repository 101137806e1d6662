"""Toy advantage actor-critic over the engine's wire protocol.

The trainer listens on a TCP port and lets the engine drive the games:
each update launches ``nopress play --agents tcp:...`` as a subprocess,
serves all seven seats (shared policy in self-play mode, or one
learning seat against six frozen copies), collects per-seat
trajectories from the request payloads, and reads the finished record
files for terminal scores. The per-phase reward mirrors the engine's
shaped reward: half the occupancy-based center delta, plus half the
proportional terminal score at the last step.

Advantages are n-step returns (n=15 by default) minus the value head.
"""

from __future__ import annotations

import copy
import glob
import json
import os
import socket
import subprocess
import tempfile
import threading

import numpy as np
import torch

from .config import A2CConfig
from .infer import decide, occupancy_control, tensor_from_payload, SEASON_IDX
from .network import Policy

TOTAL_CENTERS = 34


class _Step:
    __slots__ = ("board", "prev", "power_idx", "season_idx", "loc_rows",
                 "cands", "chosen", "occ")

    def __init__(self, board, prev, power_idx, season_idx, loc_rows, cands,
                 chosen, occ):
        self.board = board
        self.prev = prev
        self.power_idx = power_idx
        self.season_idx = season_idx
        self.loc_rows = loc_rows
        self.cands = cands
        self.chosen = chosen
        self.occ = occ


class _SeatLog:
    def __init__(self, power: str, game_idx: int):
        self.power = power
        self.game_idx = game_idx
        self.steps: list[_Step] = []


class _Server:
    """Serves every engine connection; records learning seats."""

    def __init__(self, learner: Policy, frozen: Policy | None,
                 learner_powers: set[str], seed: int):
        self.learner = learner
        self.frozen = frozen
        self.learner_powers = learner_powers
        self.lock = threading.Lock()
        self.generator = torch.Generator().manual_seed(seed)
        self.logs: list[_SeatLog] = []
        self.game_counter: dict[str, int] = {}
        self.sock = socket.create_server(("127.0.0.1", 0))
        self.port = self.sock.getsockname()[1]
        self.threads: list[threading.Thread] = []
        self._stop = False
        self.accept_thread = threading.Thread(target=self._accept, daemon=True)
        self.accept_thread.start()

    def _accept(self):
        while not self._stop:
            try:
                conn, _ = self.sock.accept()
            except OSError:
                return
            t = threading.Thread(target=self._serve, args=(conn,), daemon=True)
            t.start()
            self.threads.append(t)

    def _serve(self, conn):
        f = conn.makefile("rw", encoding="utf-8", newline="\n")
        log: _SeatLog | None = None

        def reply(msg):
            f.write(json.dumps(msg, sort_keys=True) + "\n")
            f.flush()

        try:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                msg = json.loads(line)
                kind = msg.get("type")
                if kind == "hello":
                    reply({"type": "hello", "protocol": 1, "name": "a2c"})
                elif kind == "request_orders":
                    with self.lock:
                        power = msg["power"]
                        learning = power in self.learner_powers
                        if log is None:
                            idx = self.game_counter.get(power, 0)
                            self.game_counter[power] = idx + 1
                            log = _SeatLog(power, idx)
                            if learning:
                                self.logs.append(log)
                        policy = self.learner if learning or self.frozen is None \
                            else self.frozen
                        mode = "sample" if learning else "greedy"
                        texts, _, loc_rows, cands, chosen = decide(
                            policy, msg, mode=mode, generator=self.generator)
                        if learning:
                            log.steps.append(_Step(
                                tensor_from_payload(msg["board"]),
                                tensor_from_payload(msg["prev_order_tensor"]),
                                policy.powers.index(power),
                                SEASON_IDX[msg["phase"][0]],
                                loc_rows, cands, chosen,
                                occupancy_control(policy, msg["state"], power)))
                    reply({"type": "orders", "orders": texts})
                elif kind == "bye":
                    break
        except (OSError, json.JSONDecodeError):
            pass
        finally:
            try:
                conn.close()
            except OSError:
                pass

    def close(self):
        self._stop = True
        try:
            self.sock.close()
        except OSError:
            pass


def _final_scores(record: dict) -> tuple[dict, dict]:
    """(terminal proportional score, final occupancy) per power."""
    final = record["phases"][-1]["state"] if record["phases"] else {}
    centers = {p: len(cs) for p, cs in final.get("centers", {}).items()}
    out = record.get("outcome", {})
    scores = {}
    if out.get("type") == "solo":
        scores = {out["power"]: float(TOTAL_CENTERS)}
    elif out.get("type") == "draw":
        total = sum(centers.get(p, 0) for p in out.get("survivors", ()))
        for p in out.get("survivors", ()):
            if total:
                scores[p] = TOTAL_CENTERS * centers.get(p, 0) / total
    return scores, centers


def _rewards_for(log: _SeatLog, record: dict, policy: Policy) -> list[float]:
    scores, final_centers = _final_scores(record)
    final_state = record["phases"][-1]["state"] if record["phases"] else {}
    occs = [s.occ for s in log.steps]
    final_occ = occupancy_control(policy, final_state, log.power)
    rewards = []
    for t in range(len(occs)):
        nxt = occs[t + 1] if t + 1 < len(occs) else final_occ
        local = nxt - occs[t]
        terminal = scores.get(log.power, 0.0) if t == len(occs) - 1 else 0.0
        rewards.append((local + terminal) / 2.0)
    return rewards


def _update(policy: Policy, optimizer, logs: list[_SeatLog],
            records: list[dict], cfg: A2CConfig) -> dict:
    policy.train()
    all_obs, all_returns, all_steps = [], [], []
    for log in logs:
        if not log.steps:
            continue
        record = records[log.game_idx]
        rewards = _rewards_for(log, record, policy)
        # bootstrap values for n-step returns
        with torch.no_grad():
            values = _values_of(policy, log.steps)
        T = len(rewards)
        for t in range(T):
            g = 0.0
            horizon = min(cfg.n_step, T - t)
            for k in range(horizon):
                g += (cfg.gamma ** k) * rewards[t + k]
            if t + horizon < T:
                g += (cfg.gamma ** horizon) * float(values[t + horizon])
            all_obs.append(log.steps[t])
            all_returns.append(g)
    if not all_obs:
        return {"steps": 0}

    returns = torch.tensor(all_returns, dtype=torch.float32)
    total_pg = torch.zeros(())
    total_v = torch.zeros(())
    total_h = torch.zeros(())
    chunk = 48
    n = len(all_obs)
    optimizer.zero_grad()
    for i in range(0, n, chunk):
        part = all_obs[i:i + chunk]
        boards = torch.as_tensor(np.stack([s.board for s in part]))
        prevs = torch.as_tensor(np.stack([s.prev for s in part]))
        power = torch.tensor([s.power_idx for s in part])
        season = torch.tensor([s.season_idx for s in part])
        cond = policy.conditioning(power, season)
        h_enc = policy.encode(boards, prevs, cond)
        v = policy.value(h_enc)
        ret = returns[i:i + chunk]
        adv = (ret - v).detach()
        pg = torch.zeros(())
        ent = torch.zeros(())
        for j, s in enumerate(part):
            if not s.loc_rows:
                continue
            logp_sum = torch.zeros(())
            state = policy.initial_state(1, dtype=h_enc.dtype)
            prev_tok = torch.tensor([policy.start_token])
            for row, cands, act in zip(s.loc_rows, s.cands, s.chosen):
                logp, state = policy.step_logits(
                    h_enc[j:j + 1], state, torch.tensor([row]), prev_tok,
                    cands)
                pos = (cands == act).nonzero(as_tuple=True)[0][0]
                logp_sum = logp_sum + logp[pos]
                ent = ent - (logp.exp() * logp).sum()
                prev_tok = torch.tensor([act])
            pg = pg - logp_sum * adv[j]
        v_loss = ((v - ret) ** 2).sum()
        loss = (pg + cfg.value_coef * v_loss - cfg.entropy_coef * ent) / n
        loss.backward()
        total_pg = total_pg + pg.detach()
        total_v = total_v + v_loss.detach()
        total_h = total_h + ent.detach()
    torch.nn.utils.clip_grad_norm_(policy.parameters(), 5.0)
    optimizer.step()
    return {"steps": n, "pg": float(total_pg) / n,
            "value_mse": float(total_v) / n, "entropy": float(total_h) / n}


def _values_of(policy: Policy, steps: list[_Step]) -> list[float]:
    boards = torch.as_tensor(np.stack([s.board for s in steps]))
    prevs = torch.as_tensor(np.stack([s.prev for s in steps]))
    power = torch.tensor([s.power_idx for s in steps])
    season = torch.tensor([s.season_idx for s in steps])
    cond = policy.conditioning(power, season)
    return policy.value(policy.encode(boards, prevs, cond)).tolist()


def a2c_selfplay(policy: Policy, cfg: A2CConfig | None = None,
                 engine_cmd: str = "nopress", log=None) -> dict:
    """Train in place; returns the reward trace and update diagnostics.

    ``opponents="frozen"`` plays one learning seat (rotating each batch)
    against six frozen copies of the starting policy; ``"self"`` shares
    the live policy across all seven seats.
    """
    cfg = cfg or A2CConfig()
    torch.manual_seed(cfg.seed)
    frozen = None
    if cfg.opponents == "frozen":
        frozen = copy.deepcopy(policy)
        frozen.eval()
    optimizer = torch.optim.Adam(policy.parameters(), lr=cfg.lr)
    trace: list[float] = []
    diagnostics: list[dict] = []
    games_done = 0
    batch_idx = 0
    while games_done < cfg.total_games:
        n_games = min(cfg.games_per_update, cfg.total_games - games_done)
        learner_powers = (set(policy.powers) if cfg.opponents == "self"
                          else {policy.powers[batch_idx % len(policy.powers)]})
        server = _Server(policy, frozen, learner_powers,
                         seed=cfg.seed * 7919 + batch_idx)
        try:
            with tempfile.TemporaryDirectory() as tmp:
                cmd = [engine_cmd, "play",
                       "--agents", f"tcp:127.0.0.1:{server.port}",
                       "-n", str(n_games),
                       "--seed", str(cfg.seed * 1000003 + batch_idx),
                       "--year-cap", str(cfg.year_cap),
                       "--out", tmp]
                proc = subprocess.run(cmd, capture_output=True, text=True)
                if proc.returncode != 0:
                    raise RuntimeError(
                        f"engine failed: {proc.stderr[-2000:]}")
                records = []
                for path in sorted(glob.glob(os.path.join(tmp, "*.json"))):
                    with open(path) as fh:
                        records.append(json.load(fh))
        finally:
            server.close()
        for agent_log in server.logs:
            rewards = _rewards_for(agent_log, records[agent_log.game_idx],
                                   policy)
            trace.append(sum(rewards))
        diag = _update(policy, optimizer, server.logs, records, cfg)
        diag["games"] = n_games
        diagnostics.append(diag)
        games_done += n_games
        batch_idx += 1
        if log:
            recent = trace[-10:]
            log(f"games {games_done}/{cfg.total_games} "
                f"avg10 {sum(recent) / len(recent):.2f} "
                f"steps {diag.get('steps', 0)}")
    return {"reward_trace": trace, "diagnostics": diagnostics}


def moving_average(xs, window: int = 10) -> list[float]:
    out = []
    for i in range(len(xs)):
        lo = max(0, i - window + 1)
        out.append(sum(xs[lo:i + 1]) / (i + 1 - lo))
    return out
