"""Turning wire-protocol payloads into model inputs and order texts.

The engine ships board/prev-order tensors, legal order texts per
location, and the decode ordering inside every request, so serving
never re-implements board featurization or rules.
"""

from __future__ import annotations

import numpy as np
import torch

from .network import Policy

SEASON_IDX = {"S": 0, "F": 1, "W": 2}


def tensor_from_payload(d: dict) -> np.ndarray:
    return np.asarray(d["data"], dtype=np.float32).reshape(d["shape"])


def decode_request(policy: Policy, payload: dict):
    """(board, prev, power_idx, season_idx, loc_rows, candidate tensors,
    candidate texts) for one request_orders payload."""
    board = tensor_from_payload(payload["board"])
    prev = tensor_from_payload(payload["prev_order_tensor"])
    power_idx = policy.powers.index(payload["power"])
    season_idx = SEASON_IDX[payload["phase"][0]]
    loc_rows, cand_tensors, cand_texts = [], [], []
    for loc in payload["decode_order"]:
        texts = [t for t in payload["legal"].get(loc, ())
                 if t in policy.vocab_index]
        if not texts:
            continue
        loc_rows.append(policy.loc_index[loc])
        cand_tensors.append(torch.tensor(
            [policy.vocab_index[t] for t in texts], dtype=torch.long))
        cand_texts.append(texts)
    return board, prev, power_idx, season_idx, loc_rows, cand_tensors, cand_texts


@torch.no_grad()
def decide(policy: Policy, payload: dict, mode: str = "greedy",
           generator=None):
    """Order texts for one request; also returns decode bookkeeping for
    trainers: (texts, h_enc, loc_rows, candidates, chosen ids)."""
    policy.eval()
    board, prev, power_idx, season_idx, loc_rows, cands, texts = \
        decode_request(policy, payload)
    boards = torch.as_tensor(board).unsqueeze(0)
    prevs = torch.as_tensor(prev).unsqueeze(0)
    cond = policy.conditioning(torch.tensor([power_idx]),
                               torch.tensor([season_idx]))
    h_enc = policy.encode(boards, prevs, cond)
    if not loc_rows:
        return [], h_enc, loc_rows, cands, []
    chosen, _ = policy.decode_sample(h_enc, loc_rows, cands, mode=mode,
                                     generator=generator)
    out = [policy.vocab[i] for i in chosen]
    return out, h_enc, loc_rows, cands, chosen


def occupancy_control(policy: Policy, state: dict, power: str) -> int:
    """Supply centers controlled under the occupancy rule, computed from
    a serialized protocol state."""
    occupier = {}
    for p, units in state.get("units", {}).items():
        for text in units:
            loc = text.split(" ", 1)[1]
            occupier[loc.split("/", 1)[0]] = p
    owner = {}
    for p, provs in state.get("centers", {}).items():
        for prov in provs:
            owner[prov] = p
    count = 0
    for sc in policy.supply_centers:
        holder = occupier.get(sc, owner.get(sc))
        if holder == power:
            count += 1
    return count
