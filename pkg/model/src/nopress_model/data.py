"""Reader for the engine's `encode` export format.

The export is one ``.npz`` holding uint8 board/prev tensors per phase,
plus flattened decode steps: for every (phase, power) sample a span of
(location row, gold vocabulary id, legal vocabulary ids) in the
decoder's reading order. Samples are grouped by game so held-out splits
never leak phases of a training game.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

EXPECTED_LAYOUT = "nopress-tensors-v1"


@dataclass
class Sample:
    phase: int
    power: int
    season: int
    game: int
    loc_rows: np.ndarray          # (T,)
    gold: np.ndarray              # (T,)
    candidates: list[np.ndarray]  # T ragged arrays of legal vocab ids
    final_score: float


class Dataset:
    def __init__(self, path):
        data = np.load(path, allow_pickle=False)
        if str(data["layout"][0]) != EXPECTED_LAYOUT:
            raise ValueError(f"unexpected layout {data['layout'][0]!r}")
        self.vocab = [str(t) for t in data["vocab"]]
        self.locations = [str(t) for t in data["locations"]]
        self.powers = [str(t) for t in data["powers"]]
        self.supply_centers = [str(t) for t in data["supply_centers"]]
        self.adjacency = data["adjacency"].astype(np.float32)
        self.boards = data["boards"]
        self.prevs = data["prevs"]
        self.seasons = data["phase_season"]
        self.final_scores = data["final_scores"]

        self.samples: list[Sample] = []
        sp, spw, sg = data["sample_phase"], data["sample_power"], data["sample_game"]
        so = data["sample_offsets"]
        step_loc, step_gold = data["step_loc"], data["step_gold"]
        lo, li = data["legal_offsets"], data["legal_indices"]
        for i in range(len(sp)):
            a, b = so[i], so[i + 1]
            cands = [li[lo[t]:lo[t + 1]] for t in range(a, b)]
            if b == a:
                continue
            self.samples.append(Sample(
                int(sp[i]), int(spw[i]), int(self.seasons[sp[i]]),
                int(sg[i]), step_loc[a:b], step_gold[a:b], cands,
                float(self.final_scores[sg[i], spw[i]])))
        self.n_games = int(sg.max()) + 1 if len(sg) else 0

    def split(self, holdout_fraction: float = 0.1):
        """(train, heldout) sample lists, split by game id."""
        cut = max(1, int(round(self.n_games * (1 - holdout_fraction))))
        train = [s for s in self.samples if s.game < cut]
        held = [s for s in self.samples if s.game >= cut]
        return train, held

    def tensors_for(self, samples, device="cpu", dtype=torch.float32):
        boards = torch.as_tensor(
            self.boards[[s.phase for s in samples]], dtype=dtype,
            device=device)
        prevs = torch.as_tensor(
            self.prevs[[s.phase for s in samples]], dtype=dtype,
            device=device)
        power = torch.as_tensor([s.power for s in samples], device=device)
        season = torch.as_tensor([s.season for s in samples], device=device)
        return boards, prevs, power, season


def batches(samples, batch_size, rng: np.random.Generator | None = None):
    order = np.arange(len(samples))
    if rng is not None:
        rng.shuffle(order)
    for i in range(0, len(order), batch_size):
        yield [samples[j] for j in order[i:i + batch_size]]


def analytic_uniform_accuracy(samples) -> float:
    """Expected per-unit accuracy of a uniform-over-legal chooser."""
    inv = [1.0 / len(c) for s in samples for c in s.candidates]
    return float(np.mean(inv)) if inv else 0.0
