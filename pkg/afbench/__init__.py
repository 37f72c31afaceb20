"""Anti-forensic attack suite for audio deepfake detectors."""

__version__ = "0.1.0"
