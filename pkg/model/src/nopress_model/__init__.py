"""Toy-scale graph-conv policy for No Press Diplomacy.

Consumes the engine only through its external interfaces: the `encode`
dataset export for supervised training, and the newline-JSON wire
protocol for play and self-play.
"""

from .config import A2CConfig, DecoderConfig, EncoderConfig, ModelConfig, SLConfig
from .data import Dataset, analytic_uniform_accuracy
from .network import Policy, load_checkpoint, save_checkpoint
from .sl import ablation_sweep, build_policy, evaluate, pretrain_value, sl_train
from .a2c import a2c_selfplay, moving_average

__version__ = "0.1.0"
