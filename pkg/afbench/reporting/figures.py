"""PNG figures: confusion matrices, spectrogram triptychs and parameter sweeps."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from afbench.audio.core import AudioClip, StftConfig, logmel  # noqa: E402
from afbench.models.evaluator import AVG, ReportRow  # noqa: E402

__all__ = ["plot_confusion", "plot_spectrogram_triptych", "plot_sweep", "slug"]

logger = logging.getLogger(__name__)

# No Software/timestamp chunks, so identical figures give identical bytes.
PNG_METADATA = {"Software": None}


def slug(*parts: object) -> str:
    text = "_".join(str(p) for p in parts if p is not None and p != "")
    return "".join(c if c.isalnum() or c in "-." else "_" for c in text)


def _save(fig: Figure, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="png", dpi=100, metadata=PNG_METADATA)
    logger.debug("wrote figure %s", path)
    return path


def plot_confusion(matrix: np.ndarray, title: str, path: str | Path) -> Path:
    """2x2 confusion counts (rows true real/fake, columns predicted real/fake)."""
    fig = Figure(figsize=(3.6, 3.2))
    ax = fig.add_subplot()
    ax.imshow(matrix, cmap="Blues")
    for (i, j), count in np.ndenumerate(matrix):
        ax.text(j, i, str(int(count)), ha="center", va="center")
    ax.set_xticks([0, 1], ["real", "fake"])
    ax.set_yticks([0, 1], ["real", "fake"])
    ax.set_xlabel("Predicted")
    ax.set_ylabel("True")
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    return _save(fig, path)


def plot_spectrogram_triptych(
    original: AudioClip, attacked: AudioClip, title: str, path: str | Path, cfg: StftConfig | None = None
) -> Path:
    """Original and attacked log-mel spectrograms with their difference."""
    cfg = cfg or StftConfig(sample_rate=original.sample_rate)
    a = logmel(original, cfg).values.T
    b = logmel(attacked, cfg).values.T
    fig = Figure(figsize=(10, 3))
    axes = fig.subplots(1, 3, sharey=True)
    vmin, vmax = a.min(), a.max()
    for ax, grid, name in zip(axes, (a, b), ("original", "attacked")):
        ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis", vmin=vmin, vmax=vmax)
        ax.set_title(name, fontsize=9)
        ax.set_xlabel("frame")
    axes[2].imshow(b - a, origin="lower", aspect="auto", cmap="coolwarm")
    axes[2].set_title("difference", fontsize=9)
    axes[2].set_xlabel("frame")
    axes[0].set_ylabel("mel bin")
    fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    return _save(fig, path)


def plot_sweep(rows: Sequence[ReportRow], title: str, path: str | Path) -> Path:
    """AUC and EER against the attack parameter, one line per dataset (and the average)."""
    fig = Figure(figsize=(5, 3.2))
    ax = fig.add_subplot()
    datasets = sorted({row.dataset_id for row in rows}, key=lambda d: (d == AVG, d))
    for dataset_id in datasets:
        members = sorted((r for r in rows if r.dataset_id == dataset_id), key=lambda r: r.parameter)
        params = [r.parameter for r in members]
        style = "-" if dataset_id == AVG else ":"
        ax.plot(params, [r.auc for r in members], style, marker="o", label=f"{dataset_id} AUC")
        ax.plot(params, [r.eer for r in members], style, marker="x", label=f"{dataset_id} EER")
    ax.set_xlabel("parameter")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title, fontsize=9)
    ax.legend(fontsize=6)
    fig.tight_layout()
    return _save(fig, path)
