"""Detection metrics over fake-class scores: ROC-AUC, EER, confusion counts, accuracy."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata
from sklearn.metrics import accuracy_score, confusion_matrix, roc_curve

from afbench.detectors.base import label_index
from afbench.errors import ShapeError, UndefinedMetricError

__all__ = ["DEFAULT_THRESHOLD", "ScoredSet", "accuracy", "confusion", "eer", "roc_auc"]

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class ScoredSet:
    """Scores (higher = more likely fake) with their true labels (0 real, 1 fake)."""

    scores: np.ndarray
    labels: np.ndarray
    name: str = ""

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64).reshape(-1)
        labels = np.array([label_index(v) for v in np.asarray(self.labels).reshape(-1).tolist()], dtype=np.int64)
        if len(scores) != len(labels):
            raise ShapeError(f"{len(scores)} scores but {len(labels)} labels")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_lists(cls, scores: Sequence[float], labels: Sequence[str | int], name: str = "") -> ScoredSet:
        return cls(np.asarray(scores, dtype=np.float64), np.asarray(labels), name)

    def __len__(self) -> int:
        return len(self.scores)

    @property
    def n_fake(self) -> int:
        return int(self.labels.sum())

    @property
    def n_real(self) -> int:
        return len(self) - self.n_fake

    def flipped(self) -> ScoredSet:
        """Same scores with the two labels exchanged."""
        return ScoredSet(self.scores, 1 - self.labels, self.name)

    def require_both_classes(self) -> None:
        if self.n_fake == 0 or self.n_real == 0:
            where = f" in {self.name}" if self.name else ""
            raise UndefinedMetricError(
                f"need both classes{where}: {self.n_real} real, {self.n_fake} fake"
            )


def roc_auc(s: ScoredSet) -> float:
    """Mann-Whitney AUC: fraction of (fake, real) pairs ranked correctly, ties counting 1/2."""
    s.require_both_classes()
    ranks = rankdata(s.scores)
    rank_sum = ranks[s.labels == 1].sum()
    n_fake, n_real = s.n_fake, s.n_real
    return float((rank_sum - n_fake * (n_fake + 1) / 2) / (n_fake * n_real))


def eer(s: ScoredSet) -> float:
    """Equal error rate from a sweep over every distinct score.

    FPR and FNR are interpolated linearly between the two adjacent thresholds where
    ``FNR - FPR`` first changes sign; at the crossing both rates are equal.
    """
    s.require_both_classes()
    fpr, tpr, _ = roc_curve(s.labels, s.scores, drop_intermediate=False)
    fnr = 1.0 - tpr
    gap = fnr - fpr
    i = int(np.argmax(gap <= 0))
    if i == 0 or gap[i] == 0:
        return float((fpr[i] + fnr[i]) / 2)
    t = gap[i - 1] / (gap[i - 1] - gap[i])
    crossing_fpr = fpr[i - 1] + t * (fpr[i] - fpr[i - 1])
    crossing_fnr = fnr[i - 1] + t * (fnr[i] - fnr[i - 1])
    return float((crossing_fpr + crossing_fnr) / 2)


def confusion(s: ScoredSet, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """2x2 counts ``[[tn, fp], [fn, tp]]``; a clip is predicted fake when its score exceeds ``threshold``."""
    predicted = (s.scores > threshold).astype(np.int64)
    return confusion_matrix(s.labels, predicted, labels=[0, 1])


def accuracy(s: ScoredSet, threshold: float = DEFAULT_THRESHOLD) -> float:
    if len(s) == 0:
        raise UndefinedMetricError("accuracy of an empty set")
    return float(accuracy_score(s.labels, (s.scores > threshold).astype(np.int64)))
