"""Log-mel spectrogram reference detector."""

from __future__ import annotations

import torch
from torch import nn

from afbench.audio.core import WORKING_RATE, StftConfig, logmel_tensor
from afbench.detectors.base import BaseDetector

__all__ = ["SpecTinyDetector"]


class SpecTinyDetector(BaseDetector):
    """2-D convolutions over the log-mel image.

    Default stack: 2 x [Conv2d 3x3 + ReLU + 2x2 mean pool] with 8/16 channels,
    global mean pool and ``Linear(16, 2)``. The log-mel grid is standardized per
    clip (zero mean, unit variance) before the first convolution.
    """

    kind = "spectrogram"

    def __init__(
        self,
        input_len: int = WORKING_RATE,
        sample_rate: int = WORKING_RATE,
        channels: tuple[int, ...] = (8, 16),
        front_end_config: StftConfig | dict | None = None,
        seed: int = 0,
        zero_head: bool = False,
    ):
        super().__init__(input_len=input_len, sample_rate=sample_rate)
        if isinstance(front_end_config, dict):
            front_end_config = StftConfig(**front_end_config)
        self.stft_config = front_end_config or StftConfig(sample_rate=sample_rate)
        self.channels = tuple(channels)
        blocks: list[nn.Module] = []
        in_channels = 1
        for out_channels in self.channels:
            blocks += [
                nn.Conv2d(in_channels, out_channels, 3, padding=1, dtype=torch.float64),
                nn.ReLU(),
                nn.AvgPool2d(2),
            ]
            in_channels = out_channels
        blocks += [
            nn.AdaptiveAvgPool2d(1),
            nn.Flatten(),
            nn.Linear(in_channels, 2, dtype=torch.float64),
        ]
        self.layers = nn.Sequential(*blocks)
        self.reset_parameters(seed, zero_head=zero_head)

    def front_end(self, x: torch.Tensor) -> torch.Tensor:
        grid = logmel_tensor(x, self.stft_config)
        mean = grid.mean(dim=(-2, -1), keepdim=True)
        # sqrt(var + eps) keeps the backward pass finite on constant grids
        std = torch.sqrt(grid.var(dim=(-2, -1), keepdim=True) + 1e-12)
        return ((grid - mean) / std).unsqueeze(1)

    def architecture(self) -> dict:
        return {
            "input_len": self.input_len,
            "sample_rate": self.sample_rate,
            "channels": list(self.channels),
            "front_end_config": self.stft_config.to_dict(),
        }
