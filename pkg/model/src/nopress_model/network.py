"""Graph-conv policy over the 81-location board.

Two input streams (board state, previous orders) pass through L
graph-convolution blocks each: neighbour aggregation with the
normalized adjacency, batch normalization conditioned on power and
season through feature-wise scale/shift, ReLU, and residual connections
where widths match. The streams never share weights and are
concatenated at the end. Orders are decoded sequentially by an LSTM
over the locations in reading order; at each step the distribution is a
softmax over that location's *legal* order indices only, so illegal
orders carry exactly zero probability. A value head predicts the final
proportional score from the mean-pooled encoding.
"""

from __future__ import annotations

import io
import json

import numpy as np
import torch
from torch import nn

from .config import DecoderConfig, EncoderConfig, ModelConfig

CHECKPOINT_LAYOUT = "nopress-tensors-v1"


class GraphConvFiLMBlock(nn.Module):
    """One conditioned graph-convolution block."""

    def __init__(self, d_in: int, d_out: int, cond: int, film_off: bool):
        super().__init__()
        self.linear = nn.Linear(d_in, d_out)
        self.norm = nn.BatchNorm1d(d_out)
        self.film = nn.Linear(cond, 2 * d_out)
        # gamma starts at exactly 1, beta at 0
        nn.init.zeros_(self.film.weight)
        nn.init.zeros_(self.film.bias)
        self.film_off = film_off
        self.residual = d_in == d_out

    def forward(self, x: torch.Tensor, adj: torch.Tensor,
                cond: torch.Tensor) -> torch.Tensor:
        b, n, _ = x.shape
        y = self.linear(torch.matmul(adj, x))
        y = self.norm(y.reshape(b * n, -1)).reshape(b, n, -1)
        if self.film_off:
            z = y
        else:
            gamma, beta = self.film(cond).chunk(2, dim=-1)
            z = y * (1.0 + gamma).unsqueeze(1) + beta.unsqueeze(1)
        out = torch.relu(z)
        if self.residual:
            out = out + x
        return out


class Encoder(nn.Module):
    """One stream of L blocks; no weight sharing between streams."""

    def __init__(self, d_in: int, cfg: EncoderConfig):
        super().__init__()
        cond = cfg.n_powers + cfg.n_seasons
        dims = [d_in] + [cfg.width] * cfg.layers
        self.blocks = nn.ModuleList([
            GraphConvFiLMBlock(dims[i], dims[i + 1], cond, cfg.film_off)
            for i in range(cfg.layers)])

    def forward(self, x, adj, cond):
        for block in self.blocks:
            x = block(x, adj, cond)
        return x


class Policy(nn.Module):
    def __init__(self, cfg: ModelConfig, vocab: list[str],
                 adjacency: np.ndarray, locations: list[str],
                 powers: list[str], supply_centers: list[str] = ()):
        super().__init__()
        self.cfg = cfg
        self.vocab = list(vocab)
        self.vocab_index = {t: i for i, t in enumerate(self.vocab)}
        self.locations = list(locations)
        self.loc_index = {n: i for i, n in enumerate(self.locations)}
        self.powers = list(powers)
        self.supply_centers = list(supply_centers)
        self.register_buffer("adjacency",
                             torch.as_tensor(adjacency, dtype=torch.float32))

        e, d = cfg.encoder, cfg.decoder
        self.board_stream = Encoder(e.board_features, e)
        self.prev_stream = Encoder(e.prev_order_features, e)
        enc_width = 2 * e.width
        self.start_token = len(self.vocab)
        self.order_emb = nn.Embedding(len(self.vocab) + 1, d.order_embedding)
        self.cell = nn.LSTMCell(enc_width + d.order_embedding, d.hidden)
        self.out_emb = nn.Embedding(len(self.vocab), d.hidden)
        self.value_head = nn.Sequential(
            nn.Linear(enc_width, cfg.value_hidden), nn.ReLU(),
            nn.Linear(cfg.value_hidden, 1))

    # -- encoder ------------------------------------------------------------

    def encode(self, board, prev, cond):
        """board (B,81,Fb), prev (B,81,Fo), cond (B,10) -> (B,81,2w)."""
        e = self.cfg.encoder
        if e.no_board:
            board = torch.zeros_like(board)
            prev = torch.zeros_like(prev)
        elif e.board_only:
            prev = torch.zeros_like(prev)
        hb = self.board_stream(board, self.adjacency, cond)
        hp = self.prev_stream(prev, self.adjacency, cond)
        return torch.cat([hb, hp], dim=-1)

    def conditioning(self, power_idx, season_idx):
        e = self.cfg.encoder
        p = torch.nn.functional.one_hot(power_idx, e.n_powers)
        s = torch.nn.functional.one_hot(season_idx, e.n_seasons)
        return torch.cat([p, s], dim=-1).to(self.adjacency.dtype)

    def value(self, h_enc):
        return self.value_head(h_enc.mean(dim=1)).squeeze(-1)

    # -- decoding -----------------------------------------------------------

    def _step_input(self, h_enc, loc_row, prev_token):
        """Decoder input at one location: its encoding (or the board mean
        under the average-embedding ablation) plus the previous order."""
        if self.cfg.encoder.average_embedding:
            site = h_enc.mean(dim=1)
        else:
            site = h_enc[torch.arange(h_enc.shape[0], device=h_enc.device),
                         loc_row]
        return torch.cat([site, self.order_emb(prev_token)], dim=-1)

    def step_logits(self, h_enc, state, loc_row, prev_token, candidates):
        """One decode step for a single sample.

        candidates: LongTensor of legal vocabulary indices. Returns
        (log_probs over candidates, new lstm state).
        """
        inp = self._step_input(h_enc, loc_row, prev_token)
        h, c = self.cell(inp, state)
        logits = self.out_emb(candidates) @ h.squeeze(0)
        return torch.log_softmax(logits, dim=-1), (h, c)

    def initial_state(self, batch: int, device=None, dtype=None):
        d = self.cfg.decoder.hidden
        device = device or self.adjacency.device
        dtype = dtype or self.adjacency.dtype
        zeros = torch.zeros(batch, d, device=device, dtype=dtype)
        return zeros, zeros.clone()

    def decode_sample(self, h_enc, loc_rows, candidate_lists,
                      gold=None, mode="greedy", generator=None):
        """Decode one sample's locations in order.

        h_enc: (1,81,2w); loc_rows: list of 81-indices; candidate_lists:
        list of LongTensors of legal vocab ids. ``gold`` enables teacher
        forcing (list of vocab ids fed as the previous order). Returns
        (chosen ids, per-step log-prob of the chosen/gold id).
        """
        state = self.initial_state(1, h_enc.device, h_enc.dtype)
        prev = torch.tensor([self.start_token], device=h_enc.device)
        chosen, logps = [], []
        for t, (row, cands) in enumerate(zip(loc_rows, candidate_lists)):
            logp, state = self.step_logits(
                h_enc, state, torch.tensor([row], device=h_enc.device),
                prev, cands)
            if mode == "sample":
                idx = int(torch.multinomial(logp.exp(), 1,
                                            generator=generator))
            else:
                idx = int(torch.argmax(logp))
            pick = int(cands[idx])
            if gold is not None:
                gold_pos = (cands == gold[t]).nonzero(as_tuple=True)[0]
                logps.append(logp[gold_pos[0]])
                feed = gold[t]
            else:
                logps.append(logp[idx])
                feed = pick
            chosen.append(pick)
            prev = torch.tensor([feed], device=h_enc.device)
        return chosen, logps


    def teacher_forcing(self, h_enc, samples, pad_id: int = 0):
        """Batched teacher-forced decode.

        ``samples``: per-sample (loc_rows, candidate arrays, gold ids).
        Returns (sum of gold log-probs, per-step gold log-probs list,
        per-step argmax-hit mask list) aligned per sample.
        """
        device = h_enc.device
        b = h_enc.shape[0]
        lengths = [len(s[0]) for s in samples]
        max_t = max(lengths)
        max_c = max((len(c) for s in samples for c in s[1]), default=1)

        state = self.initial_state(b, device, h_enc.dtype)
        prev = torch.full((b,), self.start_token, dtype=torch.long,
                          device=device)
        total = h_enc.new_zeros(())
        logps: list[list[torch.Tensor]] = [[] for _ in range(b)]
        hits: list[list[bool]] = [[] for _ in range(b)]
        for t in range(max_t):
            active = [i for i in range(b) if t < lengths[i]]
            rows = torch.zeros(b, dtype=torch.long, device=device)
            cands = torch.full((b, max_c), pad_id, dtype=torch.long,
                               device=device)
            cmask = torch.zeros(b, max_c, dtype=torch.bool, device=device)
            gold_pos = torch.zeros(b, dtype=torch.long, device=device)
            for i in active:
                loc_rows, cand_lists, gold = samples[i]
                rows[i] = int(loc_rows[t])
                cs = cand_lists[t]
                cands[i, :len(cs)] = torch.as_tensor(
                    np.asarray(cs), dtype=torch.long, device=device)
                cmask[i, :len(cs)] = True
                gold_pos[i] = int(np.nonzero(np.asarray(cs) == gold[t])[0][0])
            inp = self._step_input(h_enc, rows, prev)
            h, c = self.cell(inp, state)
            state = (h, c)
            logits = torch.bmm(self.out_emb(cands), h.unsqueeze(-1)).squeeze(-1)
            logits = logits.masked_fill(~cmask, float("-inf"))
            logp = torch.log_softmax(logits, dim=-1)
            arg = logp.argmax(dim=-1)
            gold_logp = logp.gather(1, gold_pos.unsqueeze(1)).squeeze(1)
            nxt = prev.clone()
            for i in active:
                logps[i].append(gold_logp[i])
                hits[i].append(bool(arg[i] == gold_pos[i]))
                total = total + gold_logp[i]
                nxt[i] = samples[i][2][t]          # feed the gold order
            prev = nxt
        return total, logps, hits


def save_checkpoint(path, policy: Policy, extra: dict | None = None) -> None:
    """Self-describing array container: weights + vocab + adjacency."""
    arrays = {f"param:{k}": v.detach().cpu().numpy()
              for k, v in policy.state_dict().items()}
    meta = {"config": _config_dict(policy.cfg), "extra": extra or {}}
    arrays["layout"] = np.array([CHECKPOINT_LAYOUT])
    arrays["meta"] = np.array([json.dumps(meta)])
    arrays["vocab"] = np.array(policy.vocab)
    arrays["locations"] = np.array(policy.locations)
    arrays["powers"] = np.array(policy.powers)
    arrays["supply_centers"] = np.array(policy.supply_centers)
    arrays["adjacency"] = policy.adjacency.cpu().numpy()
    np.savez_compressed(path, **arrays)


def load_checkpoint(path) -> Policy:
    data = np.load(path, allow_pickle=False)
    if str(data["layout"][0]) != CHECKPOINT_LAYOUT:
        raise ValueError(f"unknown checkpoint layout {data['layout'][0]!r}")
    meta = json.loads(str(data["meta"][0]))
    cfg = _config_from_dict(meta["config"])
    policy = Policy(cfg, [str(t) for t in data["vocab"]],
                    data["adjacency"],
                    [str(t) for t in data["locations"]],
                    [str(t) for t in data["powers"]],
                    [str(t) for t in data["supply_centers"]])
    state = {k[len("param:"):]: torch.as_tensor(v)
             for k, v in data.items() if k.startswith("param:")}
    policy.load_state_dict(state)
    return policy


def _config_dict(cfg: ModelConfig) -> dict:
    return {
        "encoder": vars(cfg.encoder).copy(),
        "decoder": vars(cfg.decoder).copy(),
        "value_hidden": cfg.value_hidden,
    }


def _config_from_dict(d: dict) -> ModelConfig:
    return ModelConfig(EncoderConfig(**d["encoder"]),
                       DecoderConfig(**d["decoder"]),
                       d["value_hidden"])
