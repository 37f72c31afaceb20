"""Forward pass, loss and exact reverse-mode gradients for any detector."""

from __future__ import annotations

from collections.abc import Sequence
from typing import Literal

import numpy as np
import torch
import torch.nn.functional as F
from pydantic import BaseModel, ConfigDict, field_validator

from afbench.audio.core import AudioClip, fit_length
from afbench.detectors.base import BaseDetector, label_index
from afbench.errors import ConfigError

__all__ = [
    "LossKind",
    "batch_tensor",
    "forward",
    "loss_and_input_grad",
    "loss_tensor",
    "param_grad",
    "predict_labels",
    "score_clips",
]


class LossKind(BaseModel):
    """Class-weighted cross-entropy over the two logits."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["cross_entropy"] = "cross_entropy"
    class_weights: tuple[float, float] = (1.0, 1.0)

    @field_validator("class_weights")
    @classmethod
    def _positive(cls, value: tuple[float, float]) -> tuple[float, float]:
        if min(value) <= 0:
            raise ValueError(f"class weights must be positive, got {value}")
        return value

    @property
    def weight_tensor(self) -> torch.Tensor:
        return torch.tensor(self.class_weights, dtype=torch.float64)


def loss_tensor(
    logits: torch.Tensor, targets: torch.Tensor, loss: LossKind | None = None
) -> torch.Tensor:
    """Weighted batch-mean cross-entropy of ``softmax(logits)`` against ``targets``."""
    loss = loss or LossKind()
    return F.cross_entropy(logits, targets, weight=loss.weight_tensor)


def _check_rate(det: BaseDetector, clip: AudioClip) -> None:
    if clip.sample_rate != det.sample_rate:
        raise ConfigError(
            f"clip {clip.id!r} is {clip.sample_rate} Hz but the detector expects {det.sample_rate} Hz"
        )


def batch_tensor(det: BaseDetector, clips: Sequence[AudioClip]) -> torch.Tensor:
    """Stack clips, each fitted to the detector's input length, into ``[batch, input_len]``."""
    for clip in clips:
        _check_rate(det, clip)
    rows = [fit_length(clip.samples, det.input_len) for clip in clips]
    return torch.from_numpy(np.stack(rows).astype(np.float64))


def forward(det: BaseDetector, clip: AudioClip) -> np.ndarray:
    """Logits ``(Z_real, Z_fake)`` of one clip."""
    _check_rate(det, clip)
    with torch.no_grad():
        return det(clip.tensor())[0].numpy()


def loss_and_input_grad(
    det: BaseDetector, clip: AudioClip, label: str | int, loss: LossKind | None = None
) -> tuple[float, np.ndarray]:
    """Loss ``J`` and its exact gradient with respect to every sample of ``clip``."""
    _check_rate(det, clip)
    x = clip.tensor(requires_grad=True)
    target = torch.tensor([label_index(label)])
    value = loss_tensor(det(x), target, loss)
    (grad,) = torch.autograd.grad(value, x)
    return float(value.detach()), grad.numpy()


def param_grad(
    det: BaseDetector,
    clips: Sequence[AudioClip],
    labels: Sequence[str | int],
    loss: LossKind | None = None,
    weight_decay: float = 0.0,
) -> np.ndarray:
    """Gradient of the batch-mean loss (plus ``weight_decay / 2 * |theta|^2``) w.r.t. theta.

    :return: Flat vector ordered as :meth:`BaseDetector.flat_parameters`.
    """
    targets = torch.tensor([label_index(label) for label in labels])
    value = loss_tensor(det(batch_tensor(det, clips)), targets, loss)
    params = list(det.parameters())
    grads = torch.autograd.grad(value, params)
    flat = torch.cat([g.reshape(-1) for g in grads])
    if weight_decay:
        flat = flat + weight_decay * det.flat_parameters()
    return flat.numpy()


def score_clips(det: BaseDetector, clips: Sequence[AudioClip], batch_size: int = 64) -> np.ndarray:
    """Fake-class probabilities, higher meaning more likely fake."""
    scores = []
    with torch.no_grad():
        for start in range(0, len(clips), batch_size):
            logits = det(batch_tensor(det, clips[start : start + batch_size]))
            scores.append(torch.softmax(logits, dim=-1)[:, 1].numpy())
    return np.concatenate(scores) if scores else np.zeros(0)


def predict_labels(det: BaseDetector, clips: Sequence[AudioClip], batch_size: int = 64) -> np.ndarray:
    """Predicted class indices (argmax of the logits; ties resolve to real)."""
    predictions = []
    with torch.no_grad():
        for start in range(0, len(clips), batch_size):
            logits = det(batch_tensor(det, clips[start : start + batch_size]))
            predictions.append(torch.argmax(logits, dim=-1).numpy())
    return np.concatenate(predictions) if predictions else np.zeros(0, dtype=np.int64)
