"""Dataset manifests: CSV rows of ``path,label,split,dataset_id``."""

from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

from afbench.audio.core import WORKING_RATE, AudioClip, resample
from afbench.audio.io import read_wav
from afbench.errors import ManifestError

__all__ = ["MANIFEST_HEADER", "SPLITS", "Manifest", "ManifestEntry", "load_manifest", "write_manifest"]

logger = logging.getLogger(__name__)

MANIFEST_HEADER = ("path", "label", "split", "dataset_id")
LABEL_NAMES = ("real", "fake")
SPLITS = ("train", "dev", "test")


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: Literal["real", "fake"]
    split: Literal["train", "dev", "test"]
    dataset_id: str

    @property
    def clip_id(self) -> str:
        return f"{self.dataset_id}/{self.path}"

    def to_row(self) -> list[str]:
        return [self.path, self.label, self.split, self.dataset_id]


@dataclass(frozen=True)
class Manifest:
    entries: tuple[ManifestEntry, ...]
    root: Path

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def resolve(self, entry: ManifestEntry) -> Path:
        path = Path(entry.path)
        return path if path.is_absolute() else self.root / path

    def split(self, name: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == name]

    @property
    def dataset_ids(self) -> list[str]:
        return sorted({e.dataset_id for e in self.entries})

    def filter(self, split: str | None = None, dataset_id: str | None = None) -> Manifest:
        entries = tuple(
            e
            for e in self.entries
            if (split is None or e.split == split) and (dataset_id is None or e.dataset_id == dataset_id)
        )
        return Manifest(entries, self.root)

    def load_clip(self, entry: ManifestEntry) -> AudioClip:
        """Read one clip, resampled to the working rate."""
        return resample(read_wav(self.resolve(entry), clip_id=entry.clip_id), WORKING_RATE)

    def load_clips(self, split: str | None = None) -> tuple[list[AudioClip], list[str]]:
        """Read every clip (optionally of one split) with its label, in manifest order."""
        entries = self.entries if split is None else self.split(split)
        return [self.load_clip(e) for e in entries], [e.label for e in entries]

    def label_counts(self) -> Counter:
        return Counter(e.label for e in self.entries)


def load_manifest(path: str | Path) -> Manifest:
    """Parse and validate a manifest CSV; relative paths resolve against its directory.

    :raises FileNotFoundError: If the manifest itself does not exist.
    :raises ManifestError: On a bad header, malformed row, unknown label or split,
        duplicate path or missing audio file. The message names the line.
    """
    path = Path(path)
    root = path.parent
    entries: list[ManifestEntry] = []
    seen: dict[str, int] = {}
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != MANIFEST_HEADER:
            raise ManifestError(f"header must be {','.join(MANIFEST_HEADER)}, got {header}", line=1)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(MANIFEST_HEADER):
                raise ManifestError(f"expected {len(MANIFEST_HEADER)} fields, got {len(row)}", line=line)
            rel, label, split, dataset_id = (field.strip() for field in row)
            if label not in LABEL_NAMES:
                raise ManifestError(f"unknown label {label!r} (use real or fake)", line=line)
            if split not in SPLITS:
                raise ManifestError(f"unknown split {split!r} (use train, dev or test)", line=line)
            if rel in seen:
                raise ManifestError(f"duplicate path {rel!r} (first on line {seen[rel]})", line=line)
            entry = ManifestEntry(rel, label, split, dataset_id)
            resolved = Path(rel) if Path(rel).is_absolute() else root / rel
            if not resolved.is_file():
                raise ManifestError(f"missing audio file {resolved}", line=line)
            seen[rel] = line
            entries.append(entry)
    manifest = Manifest(tuple(entries), root)
    logger.info("Loaded %d entries from %s (%s)", len(manifest), path, dict(manifest.label_counts()))
    return manifest


def write_manifest(entries: list[ManifestEntry] | tuple[ManifestEntry, ...], path: str | Path) -> Path:
    """Write entries as UTF-8 CSV with LF line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        writer.writerows(entry.to_row() for entry in entries)
    return path
