import shutil
import subprocess
import sys

import pytest

ENGINE = shutil.which("nopress")


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """Engine-generated dataset: 12 dumbbot games, exported via the CLI."""
    if ENGINE is None:
        pytest.skip("nopress engine CLI not installed")
    root = tmp_path_factory.mktemp("dataset")
    subprocess.run(
        [ENGINE, "play", "--agents", "dumbbot*7", "-n", "12", "--seed", "5",
         "--year-cap", "1904", "--out", str(root / "games")],
        check=True, capture_output=True)
    subprocess.run(
        [ENGINE, "encode", str(root / "games"), "--out",
         str(root / "data.npz")],
        check=True, capture_output=True)
    from nopress_model import Dataset
    return Dataset(root / "data.npz")


@pytest.fixture()
def tiny_policy(small_dataset):
    import torch
    from nopress_model import ModelConfig, build_policy
    from nopress_model.config import DecoderConfig, EncoderConfig
    torch.manual_seed(0)
    cfg = ModelConfig(EncoderConfig(layers=2, width=24),
                      DecoderConfig(hidden=32, order_embedding=16),
                      value_hidden=24)
    return build_policy(small_dataset, cfg)
