from afbench.models.evaluator import EvalReport, ReportRow, evaluate_detector
from afbench.models.trainer import AdversarialAugmenter, TrainConfig, Trainer, TrainResult, train

__all__ = [
    "AdversarialAugmenter",
    "EvalReport",
    "ReportRow",
    "TrainConfig",
    "TrainResult",
    "Trainer",
    "evaluate_detector",
    "train",
]
