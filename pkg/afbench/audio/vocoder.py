"""Phase-vocoder time stretching."""

from __future__ import annotations

import numpy as np
import torch

from afbench.audio.core import AudioClip, StftConfig, istft_tensor, stft
from afbench.errors import ConfigError

__all__ = ["time_stretch"]

# Squared-window floor for resynthesis at a changed hop. The last frame
# carries propagated phases, so samples covered only by its tapered edge are dropped.
SYNTHESIS_FLOOR = 1e-3


def _wrap(phase: np.ndarray) -> np.ndarray:
    return np.mod(phase + np.pi, 2 * np.pi) - np.pi


def time_stretch(clip: AudioClip, factor: float, cfg: StftConfig | None = None) -> AudioClip:
    """Lengthen (``factor > 1``) or shorten a clip without changing its pitch.

    Frames are analysed at ``cfg.hop`` and resynthesized at ``round(cfg.hop * factor)``.
    Each bin's phase advances by its instantaneous frequency, estimated from the
    analysis phase difference unwrapped around the bin-centre frequency.

    :return: Clip of ``round(len(clip) * factor)`` samples.
    """
    cfg = cfg or StftConfig(sample_rate=clip.sample_rate)
    analysis_hop = cfg.hop
    synthesis_hop = max(1, round(analysis_hop * factor))
    if synthesis_hop > cfg.window_len:
        raise ConfigError(f"stretch factor {factor} needs a synthesis hop longer than the window")
    out_len = round(len(clip) * factor)

    spectrum = stft(clip, cfg)
    magnitude = np.abs(spectrum)
    phase = np.angle(spectrum)
    bin_advance = 2 * np.pi * np.arange(cfg.n_bins) * analysis_hop / cfg.fft_size

    out_phase = np.empty_like(phase)
    out_phase[0] = phase[0]
    for t in range(1, phase.shape[0]):
        deviation = _wrap(phase[t] - phase[t - 1] - bin_advance)
        per_sample = (bin_advance + deviation) / analysis_hop
        out_phase[t] = out_phase[t - 1] + per_sample * synthesis_hop

    grid = torch.from_numpy(magnitude * np.exp(1j * out_phase))
    with torch.no_grad():
        samples = istft_tensor(
            grid, cfg.with_hop(synthesis_hop), out_len, norm_floor=SYNTHESIS_FLOOR
        ).numpy()
    return clip.with_samples(samples)
