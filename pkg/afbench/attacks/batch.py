"""Order-preserving attack executor over a batch of clips."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from afbench.attacks.optimization import apply_optimization
from afbench.attacks.specs import AttackSpec, derive_seed
from afbench.attacks.statistical import apply_statistical
from afbench.audio.core import AudioClip
from afbench.detectors.base import BaseDetector
from afbench.detectors.gradients import predict_labels
from afbench.errors import AFBenchError, ConfigError, ShapeError

__all__ = ["AttackBatchResult", "attack_batch", "attack_clip", "clip_seed"]

logger = logging.getLogger(__name__)


def clip_seed(spec: AttackSpec, clip: AudioClip) -> int | None:
    """Per-clip seed for seeded attacks, ``None`` for deterministic ones."""
    base = getattr(spec, "seed", None)
    return None if base is None else derive_seed(base, clip.id)


def attack_clip(
    det: BaseDetector | None, clip: AudioClip, spec: AttackSpec, label: str | int | None = None
) -> AudioClip:
    """Apply one attack to one clip.

    :param label: True label for the loss-based attacks; defaults to the clean prediction.
    """
    seed = clip_seed(spec, clip)
    if spec.family == "statistical":
        return apply_statistical(clip, spec, seed=seed)
    if det is None:
        raise ConfigError(f"{spec.kind} needs a detector")
    if label is None:
        label = int(predict_labels(det, [clip])[0])
    return apply_optimization(det, clip, label, spec, seed=seed)


@dataclass
class AttackBatchResult:
    clips: list[AudioClip] = field(default_factory=list)
    success: list[bool] = field(default_factory=list)
    errors: dict[int, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.clips)

    @property
    def success_rate(self) -> float:
        return float(np.mean(self.success)) if self.success else 0.0


def attack_batch(
    det: BaseDetector,
    clips: Sequence[AudioClip],
    spec: AttackSpec,
    labels: Sequence[str | int] | None = None,
    workers: int = 1,
) -> AttackBatchResult:
    """Attack every clip; results come back in input order whatever the scheduling.

    A clip whose attack raises keeps its clean samples, counts as unsuccessful and
    has its error message recorded under its index.
    """
    if not clips:
        return AttackBatchResult()
    if labels is not None and len(labels) != len(clips):
        raise ShapeError(f"{len(labels)} labels for {len(clips)} clips")
    clean_pred = predict_labels(det, clips)

    def run(index: int) -> AudioClip:
        label = labels[index] if labels is not None else int(clean_pred[index])
        return attack_clip(det, clips[index], spec, label)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = [pool.submit(run, i) for i in range(len(clips))]

    result = AttackBatchResult()
    for index, future in enumerate(futures):
        try:
            result.clips.append(future.result())
        except AFBenchError as e:
            logger.warning("%s failed on clip %s: %s", spec.label(), clips[index].id, e)
            result.clips.append(clips[index])
            result.errors[index] = str(e)
    attacked_pred = predict_labels(det, result.clips)
    result.success = [
        index not in result.errors and bool(attacked_pred[index] != clean_pred[index])
        for index in range(len(clips))
    ]
    return result
