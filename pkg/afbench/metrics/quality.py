"""Perceptibility metrics between an original clip and its attacked version."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import torch
import torch.nn.functional as F

from afbench.audio.core import AudioClip, StftConfig, logmel
from afbench.errors import ConfigError, NumericError, ShapeError

__all__ = ["QualityPair", "SSIM_WINDOW", "mse", "quality_scores", "spectrogram_mse", "ssim", "ssim_grids"]

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class QualityPair:
    """Original/attacked clips and their log-mel views, both min-max scaled by the original's range."""

    original: AudioClip
    attacked: AudioClip
    cfg: StftConfig | None = None

    def __post_init__(self):
        if len(self.original) != len(self.attacked):
            raise ShapeError(
                f"original has {len(self.original)} samples, attacked has {len(self.attacked)}"
            )
        if self.original.sample_rate != self.attacked.sample_rate:
            raise ConfigError(
                f"sample rates differ: {self.original.sample_rate} vs {self.attacked.sample_rate}"
            )

    @cached_property
    def spec_view(self) -> tuple[np.ndarray, np.ndarray]:
        cfg = self.cfg or StftConfig(sample_rate=self.original.sample_rate)
        a = logmel(self.original, cfg).values
        b = logmel(self.attacked, cfg).values
        low, high = a.min(), a.max()
        span = high - low if high > low else 1.0
        return (a - low) / span, (b - low) / span


def mse(p: QualityPair) -> float:
    """Mean squared per-sample waveform difference."""
    return float(np.mean((p.attacked.samples - p.original.samples) ** 2))


def spectrogram_mse(p: QualityPair) -> float:
    """Mean squared difference of the normalized log-mel views."""
    a, b = p.spec_view
    return float(np.mean((a - b) ** 2))


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> torch.Tensor:
    coords = torch.arange(size, dtype=torch.float64) - size // 2
    g = torch.exp(-(coords**2) / (2 * sigma**2))
    g = g / g.sum()
    return torch.outer(g, g)[None, None]


def ssim_grids(a: np.ndarray, b: np.ndarray, data_range: float = 1.0) -> float:
    """Mean SSIM over every valid 11x11 Gaussian-window position of two equal-shape grids."""
    if a.shape != b.shape:
        raise ShapeError(f"grid shapes differ: {a.shape} vs {b.shape}")
    if a.ndim != 2 or min(a.shape) < SSIM_WINDOW:
        raise ShapeError(f"SSIM needs grids of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {a.shape}")
    x = torch.from_numpy(np.array(a, dtype=np.float64))[None, None]
    y = torch.from_numpy(np.array(b, dtype=np.float64))[None, None]
    window = _gaussian_window()
    mu_x = F.conv2d(x, window)
    mu_y = F.conv2d(y, window)
    var_x = F.conv2d(x * x, window) - mu_x**2
    var_y = F.conv2d(y * y, window) - mu_y**2
    cov = F.conv2d(x * y, window) - mu_x * mu_y
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    ssim_map = ((2 * mu_x * mu_y + c1) * (2 * cov + c2)) / (
        (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    )
    return float(ssim_map.mean())


def ssim(p: QualityPair) -> float:
    """SSIM of the normalized log-mel views (dynamic range 1)."""
    return ssim_grids(*p.spec_view)


def quality_scores(original: AudioClip, attacked: AudioClip, cfg: StftConfig | None = None) -> dict[str, float]:
    """Waveform MSE, spectrogram-view MSE and SSIM for one pair."""
    pair = QualityPair(original, attacked, cfg)
    scores = {"waveform_mse": mse(pair), "spectrogram_mse": spectrogram_mse(pair), "ssim": ssim(pair)}
    if not all(math.isfinite(v) for v in scores.values()):
        raise NumericError(f"non-finite quality scores for clip {original.id!r}: {scores}")
    return scores
