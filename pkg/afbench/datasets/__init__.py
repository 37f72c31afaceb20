from afbench.datasets.cache import AttackCache, cache_attacked
from afbench.datasets.clip_dataset import ClipDataset
from afbench.datasets.manifest import Manifest, ManifestEntry, load_manifest, write_manifest
from afbench.datasets.synth import SynthSpec, synth_corpus

__all__ = [
    "AttackCache",
    "ClipDataset",
    "Manifest",
    "ManifestEntry",
    "SynthSpec",
    "cache_attacked",
    "load_manifest",
    "synth_corpus",
    "write_manifest",
]
