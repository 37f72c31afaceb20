"""Audio containers and the differentiable spectral front-end.

Waveforms are handled as float64 numpy arrays at the public boundary. The
front-end itself (framing, STFT, magnitude, mel projection, log) is written in
torch so that detectors consuming spectrograms can push gradients back onto
the waveform samples.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Literal

import librosa
import numpy as np
import torch
import torch.nn.functional as F
from scipy.signal import firwin, resample_poly

from afbench.errors import ConfigError, InputTooShortError, ShapeError

logger = logging.getLogger(__name__)

WORKING_RATE = 16000
MIN_SECONDS = 1
MAX_SECONDS = 4
RESAMPLE_TAPS = 64
KAISER_BETA = 8.0
ISTFT_NORM_FLOOR = 1e-10

__all__ = [
    "WORKING_RATE",
    "AudioClip",
    "Spectrogram",
    "StftConfig",
    "fit_length",
    "istft",
    "istft_tensor",
    "logmel",
    "logmel_input_gradient",
    "logmel_tensor",
    "mel_filterbank",
    "normalize_for_ingestion",
    "resample",
    "resample_ratio",
    "stft",
    "stft_tensor",
]


@dataclass(frozen=True, eq=False)
class AudioClip:
    """Mono waveform with its sample rate.

    :param samples: Amplitudes, nominally in [-1, 1]. Stored as a read-only float64 array.
    :param sample_rate: Sample rate in Hz.
    :param id: Opaque provenance string.
    """

    samples: np.ndarray
    sample_rate: int
    id: str = ""

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64).reshape(-1)
        if samples.size == 0:
            raise ShapeError("AudioClip requires at least one sample")
        if self.sample_rate <= 0:
            raise ConfigError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise ShapeError("AudioClip samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration(self) -> float:
        """Duration in seconds."""
        return len(self) / self.sample_rate

    def with_samples(self, samples: np.ndarray) -> AudioClip:
        """Return a clip with the same rate and id but new samples."""
        return replace(self, samples=samples)

    def tensor(self, requires_grad: bool = False) -> torch.Tensor:
        """Copy the samples into a float64 tensor."""
        return torch.tensor(self.samples, dtype=torch.float64, requires_grad=requires_grad)


@dataclass(frozen=True)
class StftConfig:
    """Front-end settings shared by the STFT, the vocoder and the log-mel view."""

    window_len: int = 512
    hop: int = 128
    fft_size: int = 512
    window: Literal["hann"] = "hann"
    mel_bins: int = 64
    fmin: float = 0.0
    fmax: float | None = None
    log_floor: float = 1e-10
    sample_rate: int = WORKING_RATE

    def __post_init__(self):
        if not 0 < self.hop <= self.window_len <= self.fft_size:
            raise ConfigError(
                f"need 0 < hop <= window_len <= fft_size, got "
                f"{self.hop}/{self.window_len}/{self.fft_size}"
            )
        if self.window != "hann":
            raise ConfigError(f"unsupported window {self.window!r}")
        if self.mel_bins < 1:
            raise ConfigError("mel_bins must be positive")
        if not 0 <= self.fmin < self.upper_frequency <= self.sample_rate / 2:
            raise ConfigError(f"need 0 <= fmin < fmax <= {self.sample_rate / 2}")
        if self.log_floor <= 0:
            raise ConfigError("log_floor must be positive")

    @property
    def upper_frequency(self) -> float:
        """Upper mel edge; Nyquist when ``fmax`` is unset."""
        return self.sample_rate / 2 if self.fmax is None else float(self.fmax)

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1

    def n_frames(self, n_samples: int) -> int:
        """Number of analysis frames for a signal of ``n_samples``."""
        return 1 + (n_samples - self.window_len) // self.hop

    def with_hop(self, hop: int) -> StftConfig:
        return replace(self, hop=hop)

    def to_dict(self) -> dict:
        return {
            "window_len": self.window_len,
            "hop": self.hop,
            "fft_size": self.fft_size,
            "window": self.window,
            "mel_bins": self.mel_bins,
            "fmin": self.fmin,
            "fmax": self.fmax,
            "log_floor": self.log_floor,
            "sample_rate": self.sample_rate,
        }


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """Time-frequency magnitude grid of shape ``[frames, bins]``."""

    values: np.ndarray
    frame_hop: int
    bin_kind: Literal["linear", "mel"] = "mel"
    log_scaled: bool = True

    @property
    def shape(self) -> tuple[int, int]:
        return tuple(self.values.shape)


def _window(cfg: StftConfig) -> torch.Tensor:
    return torch.hann_window(cfg.window_len, periodic=True, dtype=torch.float64)


def stft_tensor(x: torch.Tensor, cfg: StftConfig) -> torch.Tensor:
    """Hann-windowed STFT of the last axis of ``x`` without centering.

    :return: Complex tensor of shape ``[..., frames, fft_size // 2 + 1]``.
    """
    if x.shape[-1] < cfg.window_len:
        raise InputTooShortError(
            f"signal of {x.shape[-1]} samples is shorter than one window ({cfg.window_len})"
        )
    frames = x.unfold(-1, cfg.window_len, cfg.hop) * _window(cfg)
    return torch.fft.rfft(frames, n=cfg.fft_size, dim=-1)


def istft_tensor(
    grid: torch.Tensor, cfg: StftConfig, out_len: int, norm_floor: float = ISTFT_NORM_FLOOR
) -> torch.Tensor:
    """Weighted overlap-add inverse of :func:`stft_tensor`.

    Samples whose squared-window sum falls below ``norm_floor`` are set to zero.
    """
    if grid.dim() != 2 or grid.shape[-1] != cfg.n_bins:
        raise ShapeError(
            f"expected grid of shape [frames, {cfg.n_bins}], got {tuple(grid.shape)}"
        )
    window = _window(cfg)
    n_frames = grid.shape[0]
    frames = torch.fft.irfft(grid, n=cfg.fft_size, dim=-1)[:, : cfg.window_len] * window
    total = (n_frames - 1) * cfg.hop + cfg.window_len

    def fold(columns: torch.Tensor) -> torch.Tensor:
        return F.fold(
            columns.T.unsqueeze(0),
            output_size=(1, total),
            kernel_size=(1, cfg.window_len),
            stride=(1, cfg.hop),
        ).reshape(total)

    signal = fold(frames)
    wsum = fold((window**2).expand(n_frames, cfg.window_len))
    covered = wsum > norm_floor
    signal = torch.where(covered, signal / torch.where(covered, wsum, 1.0), 0.0)
    if total >= out_len:
        return signal[:out_len]
    return F.pad(signal, (0, out_len - total))


def stft(clip: AudioClip, cfg: StftConfig) -> np.ndarray:
    """Complex STFT grid of shape ``[frames, fft_size // 2 + 1]``."""
    with torch.no_grad():
        return stft_tensor(clip.tensor(), cfg).numpy()


def istft(grid: np.ndarray, cfg: StftConfig, out_len: int, sample_rate: int | None = None) -> AudioClip:
    """Resynthesize a clip of exactly ``out_len`` samples from an STFT grid."""
    with torch.no_grad():
        samples = istft_tensor(torch.as_tensor(np.asarray(grid, dtype=np.complex128)), cfg, out_len)
    return AudioClip(samples.numpy(), sample_rate or cfg.sample_rate)


@lru_cache(maxsize=16)
def _mel_filterbank(
    sample_rate: int, fft_size: int, mel_bins: int, fmin: float, fmax: float
) -> np.ndarray:
    weights = librosa.filters.mel(
        sr=sample_rate,
        n_fft=fft_size,
        n_mels=mel_bins,
        fmin=fmin,
        fmax=fmax,
        htk=True,
        norm=None,
        dtype=np.float64,
    )
    sums = weights.sum(axis=1, keepdims=True)
    if np.any(sums <= 0):
        raise ConfigError(
            f"{mel_bins} mel bands are too narrow for fft_size={fft_size}; some bands are empty"
        )
    weights = weights / sums
    weights.setflags(write=False)
    return weights


def mel_filterbank(cfg: StftConfig) -> np.ndarray:
    """Triangular mel filterbank ``[mel_bins, fft_size // 2 + 1]`` with unit row sums."""
    return _mel_filterbank(
        cfg.sample_rate, cfg.fft_size, cfg.mel_bins, float(cfg.fmin), float(cfg.upper_frequency)
    )


def logmel_tensor(x: torch.Tensor, cfg: StftConfig) -> torch.Tensor:
    """Differentiable ``log(max(fb @ |stft(x)|, floor))`` of shape ``[..., frames, mel_bins]``."""
    magnitude = torch.abs(stft_tensor(x, cfg))
    fb = torch.from_numpy(np.array(mel_filterbank(cfg)))
    return torch.log(torch.clamp(magnitude @ fb.T, min=cfg.log_floor))


def _check_rate(clip: AudioClip, cfg: StftConfig) -> None:
    if clip.sample_rate != cfg.sample_rate:
        raise ConfigError(
            f"clip rate {clip.sample_rate} Hz does not match front-end rate {cfg.sample_rate} Hz"
        )


def logmel(clip: AudioClip, cfg: StftConfig) -> Spectrogram:
    """Log-mel spectrogram of a clip."""
    _check_rate(clip, cfg)
    with torch.no_grad():
        values = logmel_tensor(clip.tensor(), cfg).numpy()
    return Spectrogram(values=values, frame_hop=cfg.hop, bin_kind="mel", log_scaled=True)


def logmel_input_gradient(clip: AudioClip, cfg: StftConfig, upstream: np.ndarray) -> np.ndarray:
    """Vector-Jacobian product of :func:`logmel` with ``upstream``.

    :param upstream: Gradient w.r.t. the log-mel grid, same shape as ``logmel(clip).values``.
    :return: Gradient w.r.t. each waveform sample.
    """
    _check_rate(clip, cfg)
    x = clip.tensor(requires_grad=True)
    out = logmel_tensor(x, cfg)
    upstream = np.array(upstream, dtype=np.float64)
    if upstream.shape != tuple(out.shape):
        raise ShapeError(f"upstream shape {upstream.shape} != log-mel shape {tuple(out.shape)}")
    (grad,) = torch.autograd.grad(out, x, grad_outputs=torch.from_numpy(upstream))
    return grad.numpy()


def resample_ratio(samples: np.ndarray, up: int, down: int, out_len: int) -> np.ndarray:
    """Polyphase Kaiser windowed-sinc resampling by ``up / down``, sized to ``out_len``."""
    ratio = Fraction(up, down)
    up, down = ratio.numerator, ratio.denominator
    if up == down:
        out = np.array(samples, dtype=np.float64)
    else:
        longest = max(up, down)
        taps = firwin(RESAMPLE_TAPS * longest + 1, 1.0 / longest, window=("kaiser", KAISER_BETA))
        out = resample_poly(np.asarray(samples, dtype=np.float64), up, down, window=taps)
    if out.shape[0] >= out_len:
        return out[:out_len]
    return np.pad(out, (0, out_len - out.shape[0]))


def resample(clip: AudioClip, new_rate: int) -> AudioClip:
    """Band-limited resampling to ``new_rate``; the identity when rates match."""
    if new_rate <= 0:
        raise ConfigError(f"new_rate must be positive, got {new_rate}")
    if new_rate == clip.sample_rate:
        return clip.with_samples(clip.samples)
    out_len = max(1, round(len(clip) * new_rate / clip.sample_rate))
    samples = resample_ratio(clip.samples, new_rate, clip.sample_rate, out_len)
    return AudioClip(samples, new_rate, clip.id)


def fit_length(x: np.ndarray | torch.Tensor, target_len: int) -> np.ndarray | torch.Tensor:
    """Wrap-pad a shorter signal or truncate a longer one to ``target_len`` samples."""
    n = x.shape[-1]
    if n == target_len:
        return x
    if n > target_len:
        return x[..., :target_len]
    index = np.arange(target_len) % n
    if isinstance(x, torch.Tensor):
        return x[..., torch.from_numpy(index)]
    return x[..., index]


def normalize_for_ingestion(clip: AudioClip, sample_rate: int = WORKING_RATE) -> AudioClip:
    """Resample to the working rate and bound the duration to [1 s, 4 s]."""
    clip = resample(clip, sample_rate)
    n = len(clip)
    target = min(max(n, MIN_SECONDS * sample_rate), MAX_SECONDS * sample_rate)
    if target != n:
        logger.debug("fitting clip %s from %d to %d samples", clip.id, n, target)
        clip = clip.with_samples(fit_length(clip.samples, target))
    return clip
