"""Factory function for creating detector instances."""

from __future__ import annotations

from afbench.detectors.base import BaseDetector
from afbench.errors import ConfigError

__all__ = ["DETECTOR_KINDS", "make_detector"]

DETECTOR_KINDS = ("raw", "spectrogram")


def make_detector(kind: str, **kwargs) -> BaseDetector:
    """Create a detector of the requested category.

    :param kind: One of "raw" (RAW-TINY) or "spectrogram" (SPEC-TINY).
    :param kwargs: Passed to the concrete detector constructor.
    :return: A concrete detector instance.
    :raises ConfigError: If kind is not one of "raw" or "spectrogram".
    """
    if kind == "raw":
        from afbench.detectors.raw import RawTinyDetector

        return RawTinyDetector(**kwargs)
    elif kind == "spectrogram":
        from afbench.detectors.spectrogram import SpecTinyDetector

        return SpecTinyDetector(**kwargs)
    else:
        raise ConfigError(f"Unknown detector kind: {kind}. Use one of: raw, spectrogram")
