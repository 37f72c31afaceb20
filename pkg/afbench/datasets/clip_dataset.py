"""Torch dataset over in-memory clips, used by the trainer's data loader."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import torch
from torch.utils.data import Dataset

from afbench.audio.core import AudioClip, fit_length
from afbench.detectors.base import label_index


class ClipDataset(Dataset):
    """Clips fitted to a fixed length, with integer labels (0 real, 1 fake)."""

    def __init__(self, clips: Sequence[AudioClip], labels: Sequence[str | int], input_len: int):
        if len(clips) != len(labels):
            raise ValueError(f"{len(clips)} clips but {len(labels)} labels")
        self.clips = list(clips)
        self.labels = [label_index(label) for label in labels]
        self.input_len = input_len

    def __len__(self) -> int:
        return len(self.clips)

    def __getitem__(self, idx: int) -> dict[str, torch.Tensor]:
        """Return one fitted waveform.

        :return: Dictionary with ``index``, ``samples`` and ``labels``.
        """
        samples = fit_length(self.clips[idx].samples, self.input_len)
        return {
            "index": torch.tensor(idx),
            "samples": torch.from_numpy(np.array(samples, dtype=np.float64)),
            "labels": torch.tensor(self.labels[idx]),
        }

    def class_counts(self) -> tuple[int, int]:
        fake = sum(self.labels)
        return len(self.labels) - fake, fake
