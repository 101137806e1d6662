"""Configuration for the encoder/decoder policy and its training loops."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class EncoderConfig:
    """Graph-conv encoder: L FiLM-conditioned blocks per input stream.

    Defaults are desk-scale; the full-scale setting uses 16 layers.
    """

    layers: int = 4                  # sweepable: 2, 4, 8, 16
    width: int = 64                  # hidden width of both streams
    board_features: int = 35
    prev_order_features: int = 40
    n_powers: int = 7
    n_seasons: int = 3

    # ablation switches
    film_off: bool = False           # freeze gamma=1, beta=0
    board_only: bool = False         # zero the previous-order stream
    no_board: bool = False           # zero both streams (mask-only decoder)
    average_embedding: bool = False  # decoder sees the mean embedding


@dataclass
class DecoderConfig:
    hidden: int = 96
    order_embedding: int = 48


@dataclass
class ModelConfig:
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    value_hidden: int = 64

    @property
    def ablation_name(self) -> str:
        e = self.encoder
        if e.no_board:
            return "masked_decoder_no_board"
        if e.board_only:
            return "board_state_only"
        if e.film_off:
            return "without_film"
        if e.average_embedding:
            return "average_embedding"
        return "full"


@dataclass
class SLConfig:
    batch_size: int = 48
    epochs: int = 3
    lr: float = 1e-3
    holdout_fraction: float = 0.1    # split by game, last fraction held out
    seed: int = 0
    max_steps: int | None = None     # cap optimizer steps (tests)


@dataclass
class A2CConfig:
    n_step: int = 15
    gamma: float = 0.99
    lr: float = 3e-4
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    games_per_update: int = 8
    total_games: int = 2000
    year_cap: int = 1903
    seed: int = 0
    opponents: str = "frozen"        # "frozen" (vs fixed policy) or "self"
    port: int = 0                    # 0: pick a free port
