"""Disk cache of attacked clips, keyed by SHA-256 over spec, clip id and detector."""

from __future__ import annotations

import hashlib
import logging
import os
import tempfile
import threading
from pathlib import Path

from afbench.attacks.batch import attack_batch, attack_clip
from afbench.attacks.specs import AttackSpec
from afbench.audio.core import AudioClip
from afbench.audio.io import write_wav
from afbench.datasets.manifest import Manifest, ManifestEntry, write_manifest
from afbench.detectors.base import BaseDetector
from afbench.detectors.checkpoint import detector_digest
from afbench.errors import ConfigError

__all__ = ["AttackCache", "cache_attacked"]

logger = logging.getLogger(__name__)


class AttackCache:
    """Attacked WAVs under ``root/<attack-kind>/<key>.wav``."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(spec: AttackSpec, clip_id: str, detector: str = "") -> str:
        parts = [spec.model_dump_json(), clip_id]
        if detector:
            parts.append(detector)
        return hashlib.sha256("||".join(parts).encode()).hexdigest()

    def path(self, spec: AttackSpec, key: str) -> Path:
        return self.root / spec.kind / f"{key}.wav"

    def contains(self, spec: AttackSpec, key: str) -> bool:
        found = self.path(spec, key).is_file()
        with self._lock:
            if found:
                self.hits += 1
            else:
                self.misses += 1
        return found

    def put(self, spec: AttackSpec, key: str, clip: AudioClip) -> Path:
        """Write atomically: temp file in the target directory, then rename."""
        target = self.path(spec, key)
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=target.parent, suffix=".tmp")
        os.close(fd)
        try:
            write_wav(clip, tmp, subtype="DOUBLE")
            os.replace(tmp, target)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return target


def cache_attacked(
    manifest: Manifest,
    spec: AttackSpec,
    out_dir: str | Path,
    det: BaseDetector | None = None,
    workers: int = 1,
    cache: AttackCache | None = None,
) -> Manifest:
    """Attack every manifest clip once and return a manifest of the attacked copies.

    Optimization attacks use each entry's true label and need ``det``; their cache
    keys include the detector digest. The attacked manifest keeps labels, splits and
    dataset ids, and is written next to the WAVs as ``<spec key>.csv``.
    """
    cache = cache or AttackCache(out_dir)
    if spec.family == "optimization" and det is None:
        raise ConfigError(f"{spec.kind} needs a detector")
    digest = detector_digest(det) if spec.family == "optimization" else ""

    keys = [cache.key(spec, entry.clip_id, digest) for entry in manifest]
    missing = [i for i, key in enumerate(keys) if not cache.contains(spec, key)]
    if missing:
        clips = [manifest.load_clip(manifest.entries[i]) for i in missing]
        labels = [manifest.entries[i].label for i in missing]
        if det is not None:
            attacked = attack_batch(det, clips, spec, labels=labels, workers=workers).clips
        else:
            attacked = [attack_clip(None, clip, spec, label) for clip, label in zip(clips, labels)]
        for i, clip in zip(missing, attacked):
            cache.put(spec, keys[i], clip)
    logger.debug(
        "%s: %d cached, %d computed", spec.label(), len(manifest) - len(missing), len(missing)
    )

    kind_dir = cache.root / spec.kind
    entries = tuple(
        ManifestEntry(f"{key}.wav", entry.label, entry.split, entry.dataset_id)
        for entry, key in zip(manifest, keys)
    )
    write_manifest(entries, kind_dir / f"{spec.key()[:16]}.csv")
    return Manifest(entries, kind_dir)
