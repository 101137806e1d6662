"""Supervised behavior cloning from engine-exported datasets.

Teacher-forced cross-entropy over per-location orders; evaluation
reports per-unit and all-orders accuracy under both teacher forcing and
greedy decoding, plus support-order accuracy bucketed by decode
position (the coordination probe).
"""

from __future__ import annotations

import numpy as np
import torch

from .config import ModelConfig, SLConfig
from .data import Dataset, analytic_uniform_accuracy, batches
from .network import Policy


def build_policy(dataset: Dataset, cfg: ModelConfig) -> Policy:
    return Policy(cfg, dataset.vocab, dataset.adjacency, dataset.locations,
                  dataset.powers, dataset.supply_centers)


def _sample_triples(samples):
    return [(s.loc_rows, s.candidates, s.gold) for s in samples]


def sampling_agreement(policy: Policy, dataset: Dataset, samples,
                       batch_size: int = 64, seed: int = 0) -> float:
    """P(sampled order == gold) under teacher forcing.

    For untrained parameters this estimates the analytic uniform
    baseline mean(1/|legal|) with per-step independent draws, unlike
    argmax accuracy whose errors correlate through one random init.
    """
    policy.eval()
    generator = torch.Generator().manual_seed(seed)
    hits = total = 0
    with torch.no_grad():
        for chunk in batches(samples, batch_size):
            boards, prevs, power, season = dataset.tensors_for(chunk)
            cond = policy.conditioning(power, season)
            h_enc = policy.encode(boards, prevs, cond)
            for i, s in enumerate(chunk):
                chosen, _ = policy.decode_sample(
                    h_enc[i:i + 1], s.loc_rows,
                    [torch.as_tensor(np.asarray(c), dtype=torch.long)
                     for c in s.candidates],
                    gold=list(s.gold), mode="sample", generator=generator)
                hits += sum(c == g for c, g in zip(chosen, s.gold))
                total += len(s.gold)
    return hits / max(total, 1)


def evaluate(policy: Policy, dataset: Dataset, samples,
             batch_size: int = 64) -> dict:
    """Accuracy report over ``samples``; no gradients."""
    policy.eval()
    tf_hits = tf_total = 0
    greedy_hits = 0
    sets_tf = sets_greedy = sets_total = 0
    support_pos: dict[int, list[int]] = {}
    with torch.no_grad():
        for chunk in batches(samples, batch_size):
            boards, prevs, power, season = dataset.tensors_for(chunk)
            cond = policy.conditioning(power, season)
            h_enc = policy.encode(boards, prevs, cond)
            _, _, hits = policy.teacher_forcing(h_enc, _sample_triples(chunk))
            for i, s in enumerate(chunk):
                tf_total += len(hits[i])
                tf_hits += sum(hits[i])
                sets_total += 1
                sets_tf += all(hits[i])
                chosen, _ = policy.decode_sample(
                    h_enc[i:i + 1], s.loc_rows,
                    [torch.as_tensor(np.asarray(c), dtype=torch.long)
                     for c in s.candidates], mode="greedy")
                ghits = [c == g for c, g in zip(chosen, s.gold)]
                greedy_hits += sum(ghits)
                sets_greedy += all(ghits)
                for pos, (gold_id, hit) in enumerate(zip(s.gold, ghits),
                                                     start=1):
                    if " S " in policy.vocab[gold_id]:
                        bucket = support_pos.setdefault(pos, [0, 0])
                        bucket[1] += 1
                        bucket[0] += hit
    return {
        "per_unit_teacher_forcing": tf_hits / max(tf_total, 1),
        "per_unit_greedy": greedy_hits / max(tf_total, 1),
        "all_orders_teacher_forcing": sets_tf / max(sets_total, 1),
        "all_orders_greedy": sets_greedy / max(sets_total, 1),
        "support_by_position": {
            str(pos): {"hits": v[0], "total": v[1],
                       "accuracy": v[0] / v[1] if v[1] else None}
            for pos, v in sorted(support_pos.items())},
        "units": tf_total,
        "samples": sets_total,
    }


def sl_train(dataset: Dataset, model_cfg: ModelConfig | None = None,
             cfg: SLConfig | None = None, policy: Policy | None = None,
             log=None) -> tuple[Policy, dict]:
    """Train by behavior cloning; returns the policy and its report."""
    model_cfg = model_cfg or ModelConfig()
    cfg = cfg or SLConfig()
    torch.manual_seed(cfg.seed)
    if policy is None:
        policy = build_policy(dataset, model_cfg)
    train, held = dataset.split(cfg.holdout_fraction)
    if not train:
        raise ValueError("empty dataset")
    untrained = evaluate(policy, dataset, held or train)
    untrained["sampling_agreement"] = sampling_agreement(
        policy, dataset, held or train, seed=cfg.seed)
    baseline = analytic_uniform_accuracy(held or train)

    opt = torch.optim.Adam(policy.parameters(), lr=cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    steps = 0
    policy.train()
    for epoch in range(cfg.epochs):
        for chunk in batches(train, cfg.batch_size, rng):
            boards, prevs, power, season = dataset.tensors_for(chunk)
            cond = policy.conditioning(power, season)
            h_enc = policy.encode(boards, prevs, cond)
            total, _, _ = policy.teacher_forcing(h_enc, _sample_triples(chunk))
            n_steps = sum(len(s.gold) for s in chunk)
            loss = -total / max(n_steps, 1)
            opt.zero_grad()
            loss.backward()
            opt.step()
            steps += 1
            if log and steps % 25 == 0:
                log(f"epoch {epoch} step {steps} loss {float(loss):.3f}")
            if cfg.max_steps and steps >= cfg.max_steps:
                break
        if cfg.max_steps and steps >= cfg.max_steps:
            break

    trained = evaluate(policy, dataset, held or train)
    report = {
        "ablation": model_cfg.ablation_name,
        "layers": model_cfg.encoder.layers,
        "analytic_uniform_baseline": baseline,
        "untrained": untrained,
        "trained": trained,
        "optimizer_steps": steps,
        "train_samples": len(train),
        "held_out_samples": len(held),
    }
    return policy, report


def ablation_sweep(dataset: Dataset, cfg: SLConfig | None = None,
                   base: ModelConfig | None = None, log=None) -> dict:
    """Train the four architecture variants; Table-3-shaped reports."""
    from dataclasses import replace
    base = base or ModelConfig()
    variants = {
        "without_film": replace(base.encoder, film_off=True),
        "board_state_only": replace(base.encoder, board_only=True),
        "average_embedding": replace(base.encoder, average_embedding=True),
        "masked_decoder_no_board": replace(base.encoder, no_board=True),
    }
    out = {}
    for name, enc in variants.items():
        model_cfg = ModelConfig(enc, base.decoder, base.value_hidden)
        _, report = sl_train(dataset, model_cfg, cfg, log=log)
        out[name] = {
            "per_unit_greedy": report["trained"]["per_unit_greedy"],
            "support_by_position": report["trained"]["support_by_position"],
        }
    return out


def pretrain_value(policy: Policy, dataset: Dataset,
                   epochs: int = 3, lr: float = 1e-3, batch_size: int = 64,
                   holdout_fraction: float = 0.1, seed: int = 0,
                   train_encoder: bool = False) -> dict:
    """Regress the final proportional score; policy weights stay frozen
    unless ``train_encoder``. Returns held-out MSE before/after."""
    torch.manual_seed(seed)
    train, held = dataset.split(holdout_fraction)
    held = held or train

    def mse(samples):
        policy.eval()
        errs = []
        with torch.no_grad():
            for chunk in batches(samples, batch_size):
                boards, prevs, power, season = dataset.tensors_for(chunk)
                cond = policy.conditioning(power, season)
                v = policy.value(policy.encode(boards, prevs, cond))
                target = torch.tensor([s.final_score for s in chunk],
                                      dtype=v.dtype)
                errs.append(((v - target) ** 2).mean().item() * len(chunk))
        return sum(errs) / len(samples)

    before = mse(held)
    params = (policy.parameters() if train_encoder
              else policy.value_head.parameters())
    opt = torch.optim.Adam(params, lr=lr)
    rng = np.random.default_rng(seed)
    policy.train()
    for _ in range(epochs):
        for chunk in batches(train, batch_size, rng):
            boards, prevs, power, season = dataset.tensors_for(chunk)
            cond = policy.conditioning(power, season)
            h = policy.encode(boards, prevs, cond)
            if not train_encoder:
                h = h.detach()
            v = policy.value(h)
            target = torch.tensor([s.final_score for s in chunk],
                                  dtype=v.dtype)
            loss = ((v - target) ** 2).mean()
            opt.zero_grad()
            loss.backward()
            opt.step()
    after = mse(held)
    return {"held_out_mse_before": before, "held_out_mse_after": after,
            "reduction": 1.0 - after / before if before else 0.0}
