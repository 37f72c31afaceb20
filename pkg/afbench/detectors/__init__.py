from afbench.detectors.base import LABELS, BaseDetector, label_index
from afbench.detectors.checkpoint import detector_digest, load_checkpoint, save_checkpoint
from afbench.detectors.factory import DETECTOR_KINDS, make_detector
from afbench.detectors.gradients import (
    LossKind,
    forward,
    loss_and_input_grad,
    param_grad,
    predict_labels,
    score_clips,
)
from afbench.detectors.raw import RawTinyDetector
from afbench.detectors.spectrogram import SpecTinyDetector

__all__ = [
    "DETECTOR_KINDS",
    "LABELS",
    "BaseDetector",
    "LossKind",
    "RawTinyDetector",
    "SpecTinyDetector",
    "detector_digest",
    "forward",
    "label_index",
    "load_checkpoint",
    "loss_and_input_grad",
    "make_detector",
    "param_grad",
    "predict_labels",
    "save_checkpoint",
    "score_clips",
]
