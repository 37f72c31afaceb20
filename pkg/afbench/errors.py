"""Exception hierarchy shared by every afbench module."""

from __future__ import annotations


class AFBenchError(Exception):
    """Base class for all afbench errors."""

    exit_code: int = 1


class ConfigError(AFBenchError, ValueError):
    """Invalid parameter, configuration or command-line usage."""

    exit_code = 2


class DataError(AFBenchError):
    """Input data is missing, malformed or unusable."""

    exit_code = 3


class AudioFormatError(DataError):
    """Malformed WAV header or unreadable audio payload."""


class UnsupportedFormatError(DataError):
    """Audio codec or sample format the toolkit does not handle."""


class ManifestError(DataError):
    """Manifest CSV failed validation."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class UndefinedMetricError(DataError):
    """A metric is undefined on the given data (e.g. single-class scores)."""


class SchemaError(DataError):
    """A report or checkpoint file does not follow the expected schema."""


class ShapeError(AFBenchError, ValueError):
    """Array shapes are inconsistent."""

    exit_code = 3


class InputTooShortError(ShapeError):
    """Signal is shorter than one analysis window."""


class NumericError(AFBenchError, ArithmeticError):
    """Non-finite values or numerically degenerate computation."""

    exit_code = 4

    def __init__(self, message: str, layer: int | None = None):
        self.layer = layer
        super().__init__(f"layer {layer}: {message}" if layer is not None else message)


class DegenerateGradientError(NumericError):
    """Gradient difference vanished, so a linearized step is undefined."""
