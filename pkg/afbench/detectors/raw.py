"""Raw-waveform reference detector."""

from __future__ import annotations

import torch
from torch import nn

from afbench.audio.core import WORKING_RATE
from afbench.detectors.base import BaseDetector

__all__ = ["RawTinyDetector"]


class RawTinyDetector(BaseDetector):
    """Strided 1-D convolutions over samples, global mean pool, dense head.

    Default stack: 4 x [Conv1d(kernel 9, stride 4) + ReLU] with 8/16/32/32
    channels, then mean over time and ``Linear(32, 2)``. The waveform is
    pre-emphasized (``y[n] = x[n] - pre_emphasis * x[n-1]``) and standardized per
    clip before the first convolution; ``pre_emphasis = 0`` skips the filter.
    """

    kind = "raw"

    def __init__(
        self,
        input_len: int = WORKING_RATE,
        sample_rate: int = WORKING_RATE,
        channels: tuple[int, ...] = (8, 16, 32, 32),
        kernel_size: int = 9,
        stride: int = 4,
        pre_emphasis: float = 0.97,
        seed: int = 0,
        zero_head: bool = False,
    ):
        super().__init__(input_len=input_len, sample_rate=sample_rate)
        self.channels = tuple(channels)
        self.kernel_size = kernel_size
        self.stride = stride
        self.pre_emphasis = float(pre_emphasis)
        blocks: list[nn.Module] = []
        in_channels = 1
        for out_channels in self.channels:
            blocks += [
                nn.Conv1d(in_channels, out_channels, kernel_size, stride=stride, dtype=torch.float64),
                nn.ReLU(),
            ]
            in_channels = out_channels
        blocks += [
            nn.AdaptiveAvgPool1d(1),
            nn.Flatten(),
            nn.Linear(in_channels, 2, dtype=torch.float64),
        ]
        self.layers = nn.Sequential(*blocks)
        self.reset_parameters(seed, zero_head=zero_head)

    def front_end(self, x: torch.Tensor) -> torch.Tensor:
        if self.pre_emphasis:
            x = torch.cat([x[:, :1], x[:, 1:] - self.pre_emphasis * x[:, :-1]], dim=1)
        mean = x.mean(dim=-1, keepdim=True)
        # sqrt(var + eps) keeps the backward pass finite on silent clips
        std = torch.sqrt(x.var(dim=-1, keepdim=True) + 1e-12)
        return ((x - mean) / std).unsqueeze(1)

    def architecture(self) -> dict:
        return {
            "input_len": self.input_len,
            "sample_rate": self.sample_rate,
            "channels": list(self.channels),
            "kernel_size": self.kernel_size,
            "stride": self.stride,
            "pre_emphasis": self.pre_emphasis,
        }
