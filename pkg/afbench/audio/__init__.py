from afbench.audio.core import (
    WORKING_RATE,
    AudioClip,
    Spectrogram,
    StftConfig,
    fit_length,
    istft,
    logmel,
    logmel_input_gradient,
    mel_filterbank,
    normalize_for_ingestion,
    resample,
    stft,
)
from afbench.audio.io import read_wav, write_wav
from afbench.audio.vocoder import time_stretch

__all__ = [
    "WORKING_RATE",
    "AudioClip",
    "Spectrogram",
    "StftConfig",
    "fit_length",
    "istft",
    "logmel",
    "logmel_input_gradient",
    "mel_filterbank",
    "normalize_for_ingestion",
    "read_wav",
    "resample",
    "stft",
    "time_stretch",
    "write_wav",
]
