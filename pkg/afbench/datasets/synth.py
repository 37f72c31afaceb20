"""Synthetic desk-scale corpus: harmonic "real" clips and artifact-bearing "fake" clips."""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from tqdm.auto import tqdm

from afbench.audio.core import WORKING_RATE, AudioClip, StftConfig, istft, stft
from afbench.audio.io import write_wav
from afbench.datasets.manifest import Manifest, ManifestEntry, write_manifest

__all__ = ["ARTIFACT_KINDS", "SynthSpec", "split_counts", "synth_clip", "synth_corpus"]

logger = logging.getLogger(__name__)

ARTIFACT_KINDS = ("spectral_notch", "hf_hiss", "phase_jitter")
DEV_FRACTION = 0.15
TEST_FRACTION = 0.15
PEAK = 0.5
NOISE_FLOOR_DB = -40.0
HISS_DB = -25.0
HISS_BAND = (5000.0, 7000.0)
NOTCH_BAND = (2000.0, 2500.0)
MAX_HARMONIC = 16


class SynthSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_per_class: int = Field(default=50, ge=1)
    duration: float = Field(default=1.0, gt=0)
    sample_rate: int = Field(default=WORKING_RATE, gt=0)
    rng_seed: int = Field(default=0, ge=0, lt=2**64)
    artifact_kind: Literal["spectral_notch", "hf_hiss", "phase_jitter"] = "hf_hiss"
    dataset_id: str = "synth"


def split_counts(n: int) -> dict[str, int]:
    """Per-class split sizes: floor proportions for dev/test, the remainder to train."""
    n_dev = math.floor(n * DEV_FRACTION)
    n_test = math.floor(n * TEST_FRACTION)
    return {"train": n - n_dev - n_test, "dev": n_dev, "test": n_test}


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x**2)))


def _band_limited(x: np.ndarray, rate: int, band: tuple[float, float], keep: bool) -> np.ndarray:
    spectrum = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(len(x), d=1.0 / rate)
    inside = (freqs >= band[0]) & (freqs <= band[1])
    spectrum[~inside if keep else inside] = 0.0
    return np.fft.irfft(spectrum, n=len(x))


def _harmonic_tone(rng: np.random.Generator, n: int, rate: int) -> np.ndarray:
    t = np.arange(n) / rate
    f0 = rng.uniform(90.0, 300.0)
    n_harmonics = int(rng.integers(3, 7))
    usable = [h for h in range(1, MAX_HARMONIC + 1) if h * f0 < rate / 2]
    harmonics = np.sort(rng.choice(usable, size=min(n_harmonics, len(usable)), replace=False))
    tone = np.zeros(n)
    for h in harmonics:
        amplitude = rng.uniform(0.2, 1.0) / h
        tone += amplitude * np.sin(2 * np.pi * h * f0 * t + rng.uniform(0, 2 * np.pi))
    am_rate = rng.uniform(1.0, 4.0)
    tone *= 1.0 + 0.3 * np.sin(2 * np.pi * am_rate * t + rng.uniform(0, 2 * np.pi))
    floor = _rms(tone) * 10 ** (NOISE_FLOOR_DB / 20)
    return tone + rng.normal(0.0, floor, n)


def _add_artifact(x: np.ndarray, rng: np.random.Generator, rate: int, kind: str) -> np.ndarray:
    if kind == "spectral_notch":
        return _band_limited(x, rate, NOTCH_BAND, keep=False)
    if kind == "hf_hiss":
        hiss = _band_limited(rng.normal(size=len(x)), rate, HISS_BAND, keep=True)
        return x + hiss * (_rms(x) * 10 ** (HISS_DB / 20) / _rms(hiss))
    if kind == "phase_jitter":
        cfg = StftConfig(sample_rate=rate)
        grid = stft(AudioClip(x, rate), cfg)
        offsets = rng.uniform(-np.pi / 2, np.pi / 2, size=(grid.shape[0], 1))
        return istft(grid * np.exp(1j * offsets), cfg, len(x), sample_rate=rate).samples
    raise ValueError(f"unknown artifact kind {kind!r}")


def synth_clip(spec: SynthSpec, label: str, index: int) -> AudioClip:
    """One clip, seeded only by ``(rng_seed, label, index)``."""
    label_code = 0 if label == "real" else 1
    rng = np.random.default_rng(np.random.SeedSequence([spec.rng_seed, label_code, index]))
    n = round(spec.duration * spec.sample_rate)
    x = _harmonic_tone(rng, n, spec.sample_rate)
    if label == "fake":
        x = _add_artifact(x, rng, spec.sample_rate, spec.artifact_kind)
    x = x * (PEAK / np.max(np.abs(x)))
    return AudioClip(x, spec.sample_rate, f"{spec.dataset_id}/{label}_{index:04d}")


def synth_corpus(spec: SynthSpec, out_dir: str | Path) -> Manifest:
    """Write ``2 * n_per_class`` float WAVs and ``manifest.csv`` under ``out_dir``."""
    out_dir = Path(out_dir)
    counts = split_counts(spec.n_per_class)
    splits = ["train"] * counts["train"] + ["dev"] * counts["dev"] + ["test"] * counts["test"]
    entries: list[ManifestEntry] = []
    jobs = [(label, i) for label in ("real", "fake") for i in range(spec.n_per_class)]
    for label, i in tqdm(jobs, desc="Synthesizing", leave=False):
        rel = f"{label}/{label}_{i:04d}.wav"
        target = out_dir / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        write_wav(synth_clip(spec, label, i), target, subtype="FLOAT")
        entries.append(ManifestEntry(rel, label, splits[i], spec.dataset_id))
    manifest_path = write_manifest(entries, out_dir / "manifest.csv")
    logger.info(
        "Synthesized %d clips (%s artifact) into %s; splits per class %s",
        len(entries),
        spec.artifact_kind,
        manifest_path,
        counts,
    )
    return Manifest(tuple(entries), out_dir)
