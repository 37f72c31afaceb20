"""Shared fixtures for pytest tests."""

import numpy as np
import pytest
import torch
from torch import nn

from afbench.audio.core import AudioClip
from afbench.datasets.synth import SynthSpec, synth_corpus
from afbench.detectors.base import BaseDetector
from afbench.detectors.raw import RawTinyDetector
from afbench.detectors.spectrogram import SpecTinyDetector


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run end-to-end training tests"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: end-to-end run that trains detectors")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


class _PrependRealLogit(nn.Module):
    """Turn a single score into logits ``(0, score)``."""

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        return torch.cat([torch.zeros_like(h), h], dim=-1)


class LinearDetector(BaseDetector):
    """Z = (0, w . A + b): the analytic oracle for the attack tests."""

    kind = "linear"

    def __init__(self, w: np.ndarray, b: float = 0.0, sample_rate: int = 16000):
        super().__init__(input_len=len(w), sample_rate=sample_rate)
        dense = nn.Linear(len(w), 1, dtype=torch.float64)
        with torch.no_grad():
            dense.weight.copy_(torch.tensor(np.asarray(w, dtype=np.float64)).reshape(1, -1))
            dense.bias.fill_(b)
        self.layers = nn.Sequential(dense, _PrependRealLogit())

    def front_end(self, x: torch.Tensor) -> torch.Tensor:
        return x

    def architecture(self) -> dict:
        return {"input_len": self.input_len, "sample_rate": self.sample_rate}


@pytest.fixture
def make_linear():
    """Factory for linear detectors."""
    return LinearDetector


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tone():
    """One second of a 440 Hz sine at 16 kHz."""
    t = np.arange(16000) / 16000
    return AudioClip(0.5 * np.sin(2 * np.pi * 440.0 * t), 16000, "tone-440")


@pytest.fixture
def noise_clip(rng):
    return AudioClip(rng.normal(0.0, 0.1, 2048), 16000, "noise-2048")


@pytest.fixture
def raw_detector():
    """Small raw-waveform detector on 1024-sample inputs."""
    return RawTinyDetector(input_len=1024, seed=3)


@pytest.fixture
def spec_detector():
    """Small spectrogram detector on 2048-sample inputs."""
    return SpecTinyDetector(input_len=2048, seed=3)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """20-clip synthetic corpus (10 per class) written once per session."""
    out = tmp_path_factory.mktemp("corpus")
    return synth_corpus(SynthSpec(n_per_class=10, rng_seed=0), out)
