"""Exact, byte-stable JSON checkpoints for detectors."""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

import torch

from afbench.detectors.base import BaseDetector
from afbench.detectors.factory import make_detector
from afbench.errors import SchemaError

__all__ = [
    "CHECKPOINT_FORMAT",
    "CHECKPOINT_VERSION",
    "detector_digest",
    "dumps",
    "load_checkpoint",
    "loads",
    "save_checkpoint",
]

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "afbench-detector"
CHECKPOINT_VERSION = 1


def _document(det: BaseDetector, seed: int, train_datasets: list[str], defended: bool) -> dict:
    architecture = det.architecture()
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "kind": det.kind,
        "input_len": det.input_len,
        "sample_rate": det.sample_rate,
        "architecture": architecture,
        "layers": det.layer_descriptors(),
        "front_end": architecture.get("front_end_config"),
        "seed": int(seed),
        "train_datasets": sorted(train_datasets),
        "defended": bool(defended),
        "parameters": {
            name: {"shape": list(param.shape), "values": param.detach().reshape(-1).tolist()}
            for name, param in det.named_parameters()
        },
    }


def dumps(
    det: BaseDetector,
    seed: int = 0,
    train_datasets: list[str] | None = None,
    defended: bool = False,
) -> str:
    """Serialize a detector. Python floats round-trip exactly through ``repr``."""
    doc = _document(det, seed, train_datasets or [], defended)
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def loads(text: str, source: str = "<string>") -> tuple[BaseDetector, dict]:
    """Rebuild a detector and return it together with the checkpoint metadata."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{source}: not a JSON checkpoint ({e})") from e
    if doc.get("format") != CHECKPOINT_FORMAT or doc.get("version") != CHECKPOINT_VERSION:
        raise SchemaError(
            f"{source}: expected {CHECKPOINT_FORMAT} v{CHECKPOINT_VERSION}, "
            f"got {doc.get('format')} v{doc.get('version')}"
        )
    det = make_detector(doc["kind"], **doc["architecture"])
    stored = doc["parameters"]
    names = [name for name, _ in det.named_parameters()]
    if sorted(names) != sorted(stored):
        raise SchemaError(f"{source}: parameter names do not match the {doc['kind']} architecture")
    with torch.no_grad():
        for name, param in det.named_parameters():
            entry = stored[name]
            if list(param.shape) != entry["shape"]:
                raise SchemaError(f"{source}: shape mismatch for {name}: {entry['shape']}")
            values = torch.tensor(entry["values"], dtype=torch.float64)
            param.copy_(values.reshape(param.shape))
    meta = {key: doc[key] for key in ("seed", "train_datasets", "kind")}
    meta["defended"] = doc.get("defended", False)
    return det, meta


def save_checkpoint(
    det: BaseDetector,
    path: str | Path,
    seed: int = 0,
    train_datasets: list[str] | None = None,
    defended: bool = False,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(det, seed, train_datasets, defended), encoding="utf-8")
    logger.info("Saved %s detector checkpoint to %s", det.kind, path)
    return path


def load_checkpoint(path: str | Path) -> tuple[BaseDetector, dict]:
    """Load a detector written by :func:`save_checkpoint`.

    :raises FileNotFoundError: If the file does not exist.
    :raises SchemaError: If the file is not a compatible checkpoint.
    """
    path = Path(path)
    det, meta = loads(path.read_text(encoding="utf-8"), source=str(path))
    det.eval()
    return det, meta


def detector_digest(det: BaseDetector) -> str:
    """SHA-256 of the detector's canonical checkpoint text (architecture and theta)."""
    return hashlib.sha256(dumps(det).encode()).hexdigest()
