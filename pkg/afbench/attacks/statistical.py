"""Model-agnostic anti-forensic transforms: pitch, median filter, noise, quantization.

Every transform maps an :class:`AudioClip` to a clip of the same length and rate.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy.ndimage import median_filter as _median

from afbench.attacks.specs import (
    MedianFilterSpec,
    NoiseSpec,
    PitchShiftSpec,
    QuantizeSpec,
    StatAttackSpec,
)
from afbench.audio.core import AudioClip, StftConfig, resample_ratio
from afbench.audio.vocoder import time_stretch
from afbench.errors import ConfigError

__all__ = ["apply_statistical", "median_filter", "noise_add", "pitch_shift", "quantize"]

MAX_SEMITONES = 24
RATIO_DENOMINATOR = 1000


def pitch_shift(clip: AudioClip, n: int, cfg: StftConfig | None = None) -> AudioClip:
    """Shift pitch by ``n`` semitones keeping the duration.

    The clip is time-stretched by ``r = 2 ** (n / 12)`` and then resampled by ``1 / r``.
    """
    if abs(n) > MAX_SEMITONES:
        raise ConfigError(f"|n| must be <= {MAX_SEMITONES} semitones, got {n}")
    if n == 0:
        return clip.with_samples(clip.samples)
    factor = 2.0 ** (n / 12)
    stretched = time_stretch(clip, factor, cfg)
    ratio = Fraction(factor).limit_denominator(RATIO_DENOMINATOR)
    samples = resample_ratio(stretched.samples, ratio.denominator, ratio.numerator, len(clip))
    return clip.with_samples(samples)


def median_filter(clip: AudioClip, N: int) -> AudioClip:  # noqa: N803
    """Sliding median over ``N`` samples with edge-replicate padding."""
    if N < 3 or N % 2 == 0:
        raise ConfigError(f"median kernel must be odd and >= 3, got {N}")
    return clip.with_samples(_median(clip.samples, size=N, mode="nearest"))


def noise_add(clip: AudioClip, sigma: float, seed: int) -> AudioClip:
    """Add i.i.d. ``N(0, sigma^2)`` noise from a generator seeded with ``seed``; no clipping."""
    if sigma < 0:
        raise ConfigError(f"sigma must be non-negative, got {sigma}")
    rng = np.random.default_rng(seed)
    return clip.with_samples(clip.samples + rng.normal(0.0, sigma, len(clip)))


def quantize(clip: AudioClip, b: int) -> AudioClip:
    """Uniform quantization to ``2 ** b`` levels on [-1, 1], rounding half away from zero."""
    if b < 2:
        raise ConfigError(f"bit depth must be >= 2, got {b}")
    steps = 2 ** (b - 1) - 1
    scaled = (np.clip(clip.samples, -1.0, 1.0) + 1.0) * steps
    # scaled >= 0, so floor(x + 0.5) rounds halves away from zero
    return clip.with_samples(np.floor(scaled + 0.5) / steps - 1.0)


def apply_statistical(clip: AudioClip, spec: StatAttackSpec, seed: int | None = None) -> AudioClip:
    """Dispatch a statistical spec; ``seed`` overrides the noise spec's own seed."""
    if isinstance(spec, PitchShiftSpec):
        return pitch_shift(clip, spec.semitones)
    if isinstance(spec, MedianFilterSpec):
        return median_filter(clip, spec.kernel)
    if isinstance(spec, NoiseSpec):
        return noise_add(clip, spec.sigma, spec.seed if seed is None else seed)
    if isinstance(spec, QuantizeSpec):
        return quantize(clip, spec.bits)
    raise ConfigError(f"not a statistical attack: {spec!r}")
