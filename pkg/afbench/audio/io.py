"""RIFF/WAV reading and writing (PCM 16-bit and IEEE float, 32 or 64 bits)."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.io import wavfile

from afbench.audio.core import AudioClip
from afbench.errors import AudioFormatError, ConfigError, UnsupportedFormatError

logger = logging.getLogger(__name__)

PCM16_SCALE = 32768.0
Subtype = Literal["PCM_16", "FLOAT", "DOUBLE"]

__all__ = ["read_wav", "write_wav"]


def _check_riff(path: Path) -> None:
    with path.open("rb") as fh:
        header = fh.read(12)
    if len(header) < 12 or header[:4] not in (b"RIFF", b"RIFX") or header[8:12] != b"WAVE":
        raise AudioFormatError(f"{path}: not a RIFF/WAVE file")


def read_wav(path: str | Path, clip_id: str | None = None) -> AudioClip:
    """Read a WAV file and down-mix it to mono.

    :param path: WAV file with 16-bit PCM or 32/64-bit float samples.
    :param clip_id: Provenance id; defaults to the file name.
    :return: Clip with integer PCM scaled by ``1 / 32768``.
    :raises FileNotFoundError: If the file does not exist.
    :raises AudioFormatError: On a malformed header.
    :raises UnsupportedFormatError: On any other sample format.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"WAV file not found: {path}")
    _check_riff(path)
    try:
        rate, data = wavfile.read(path)
    except ValueError as e:
        message = str(e)
        if "Unknown wave file format" in message or "Unsupported" in message:
            raise UnsupportedFormatError(f"{path}: {message}") from e
        raise AudioFormatError(f"{path}: {message}") from e

    if data.dtype == np.int16:
        samples = data.astype(np.float64) / PCM16_SCALE
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise UnsupportedFormatError(f"{path}: unsupported sample type {data.dtype}")

    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if samples.size == 0:
        raise AudioFormatError(f"{path}: no audio frames")
    return AudioClip(samples, int(rate), clip_id if clip_id is not None else path.name)


def write_wav(clip: AudioClip, path: str | Path, subtype: Subtype = "FLOAT") -> None:
    """Write a mono WAV file.

    ``PCM_16`` rounds to the nearest step and clips to ``[-1, 1 - 1/32768]``;
    ``FLOAT`` stores float32 samples and ``DOUBLE`` stores float64 samples unchanged.
    """
    if subtype == "PCM_16":
        ints = np.clip(np.round(clip.samples * PCM16_SCALE), -PCM16_SCALE, PCM16_SCALE - 1)
        data = ints.astype(np.int16)
    elif subtype == "FLOAT":
        data = clip.samples.astype(np.float32)
    elif subtype == "DOUBLE":
        data = clip.samples.astype(np.float64)
    else:
        raise ConfigError(f"unsupported WAV subtype {subtype!r}; use PCM_16, FLOAT or DOUBLE")
    wavfile.write(Path(path), clip.sample_rate, data)
    logger.debug("wrote %d samples to %s (%s)", len(clip), path, subtype)
