from afbench.metrics.detection import ScoredSet, accuracy, confusion, eer, roc_auc
from afbench.metrics.quality import QualityPair, mse, quality_scores, spectrogram_mse, ssim, ssim_grids

__all__ = [
    "QualityPair",
    "ScoredSet",
    "accuracy",
    "confusion",
    "eer",
    "mse",
    "quality_scores",
    "roc_auc",
    "spectrogram_mse",
    "ssim",
    "ssim_grids",
]
