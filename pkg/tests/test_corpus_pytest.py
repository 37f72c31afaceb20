"""Pytest tests for manifests, the synthetic corpus and the attacked-clip cache."""

import numpy as np
import pytest

from afbench.attacks.batch import clip_seed
from afbench.attacks.specs import FgsmSpec, MedianFilterSpec, NoiseSpec
from afbench.attacks.statistical import median_filter, noise_add
from afbench.audio.core import AudioClip
from afbench.audio.io import read_wav, write_wav
from afbench.datasets.cache import AttackCache, cache_attacked
from afbench.datasets.manifest import (
    Manifest,
    ManifestEntry,
    load_manifest,
    write_manifest,
)
from afbench.datasets.synth import SynthSpec, split_counts, synth_clip
from afbench.detectors.raw import RawTinyDetector
from afbench.errors import ConfigError, ManifestError


def band_energy(clip: AudioClip, low: float, high: float) -> float:
    spectrum = np.abs(np.fft.rfft(clip.samples)) ** 2
    freqs = np.fft.rfftfreq(len(clip), 1.0 / clip.sample_rate)
    return float(spectrum[(freqs >= low) & (freqs <= high)].sum() / spectrum.sum())


@pytest.fixture
def audio_dir(tmp_path):
    """Directory with two short WAV files."""
    for name in ("a.wav", "b.wav"):
        write_wav(AudioClip(np.zeros(1600), 16000), tmp_path / name)
    return tmp_path


def write_csv(directory, *rows, header="path,label,split,dataset_id"):
    path = directory / "manifest.csv"
    path.write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")
    return path


class TestManifest:
    """Tests for manifest parsing."""

    def test_valid_manifest(self, audio_dir):
        """Test that a well-formed manifest loads in order."""
        path = write_csv(audio_dir, "a.wav,real,train,d1", "b.wav,fake,test,d2")
        manifest = load_manifest(path)
        assert len(manifest) == 2
        assert manifest.entries[0] == ManifestEntry("a.wav", "real", "train", "d1")
        assert manifest.dataset_ids == ["d1", "d2"]
        assert manifest.resolve(manifest.entries[1]) == audio_dir / "b.wav"
        assert len(manifest.filter(split="test")) == 1
        assert manifest.filter(dataset_id="d1").entries[0].path == "a.wav"

    def test_load_clips(self, audio_dir):
        """Test that clips load with their ids and labels."""
        manifest = load_manifest(write_csv(audio_dir, "a.wav,real,train,d1", "b.wav,fake,train,d1"))
        clips, labels = manifest.load_clips("train")
        assert labels == ["real", "fake"]
        assert clips[0].id == "d1/a.wav"
        assert len(clips[1]) == 1600

    def test_load_clip_resamples(self, audio_dir):
        """Test that an 8 kHz file is read at the 16 kHz working rate."""
        write_wav(AudioClip(np.zeros(800), 8000), audio_dir / "slow.wav")
        manifest = load_manifest(write_csv(audio_dir, "slow.wav,real,test,d1"))
        clip = manifest.load_clip(manifest.entries[0])
        assert clip.sample_rate == 16000
        assert len(clip) == 1600
        assert clip.id == "d1/slow.wav"

    def test_bad_header(self, audio_dir):
        """Test that a wrong header fails on line 1."""
        path = write_csv(audio_dir, "a.wav,real,train,d1", header="file,label,split,dataset")
        with pytest.raises(ManifestError) as excinfo:
            load_manifest(path)
        assert excinfo.value.line == 1

    def test_unknown_label(self, audio_dir):
        """Test that the label 'spoof' is rejected with its line number."""
        path = write_csv(audio_dir, "a.wav,real,train,d1", "b.wav,spoof,train,d1")
        with pytest.raises(ManifestError, match="spoof") as excinfo:
            load_manifest(path)
        assert excinfo.value.line == 3

    def test_unknown_split(self, audio_dir):
        """Test that an unknown split is rejected."""
        with pytest.raises(ManifestError, match="validation"):
            load_manifest(write_csv(audio_dir, "a.wav,real,validation,d1"))

    def test_field_count(self, audio_dir):
        """Test that a short row is rejected."""
        with pytest.raises(ManifestError, match="fields"):
            load_manifest(write_csv(audio_dir, "a.wav,real,train"))

    def test_duplicate_path(self, audio_dir):
        """Test that a repeated path names the first occurrence."""
        path = write_csv(audio_dir, "a.wav,real,train,d1", "a.wav,fake,test,d1")
        with pytest.raises(ManifestError, match="first on line 2") as excinfo:
            load_manifest(path)
        assert excinfo.value.line == 3

    def test_missing_audio(self, audio_dir):
        """Test that a row pointing at no file is rejected."""
        with pytest.raises(ManifestError, match="missing"):
            load_manifest(write_csv(audio_dir, "absent.wav,real,train,d1"))

    def test_write_then_load(self, audio_dir):
        """Test that written manifests load back unchanged."""
        entries = (
            ManifestEntry("a.wav", "real", "dev", "x"),
            ManifestEntry("b.wav", "fake", "dev", "x"),
        )
        path = write_manifest(entries, audio_dir / "out.csv")
        assert path.read_text(encoding="utf-8").startswith("path,label,split,dataset_id\n")
        assert load_manifest(path).entries == entries


class TestSynth:
    """Tests for the synthetic corpus generator."""

    def test_split_counts(self):
        """Test the 70/15/15 split with floors."""
        assert split_counts(10) == {"train": 8, "dev": 1, "test": 1}
        assert split_counts(50) == {"train": 36, "dev": 7, "test": 7}
        assert split_counts(1) == {"train": 1, "dev": 0, "test": 0}

    def test_corpus_counts(self, small_corpus):
        """Test that 10 per class gives 20 files and rows."""
        assert len(small_corpus) == 20
        assert small_corpus.label_counts() == {"real": 10, "fake": 10}
        assert len(list(small_corpus.root.rglob("*.wav"))) == 20
        assert len(small_corpus.split("train")) == 16
        assert len(small_corpus.split("test")) == 2

    def test_manifest_on_disk(self, small_corpus):
        """Test that the written manifest matches the returned one."""
        loaded = load_manifest(small_corpus.root / "manifest.csv")
        assert loaded.entries == small_corpus.entries

    def test_deterministic(self):
        """Test that the same seed gives identical clips and another seed differs."""
        spec = SynthSpec(n_per_class=2, rng_seed=3)
        a = synth_clip(spec, "fake", 1)
        b = synth_clip(spec, "fake", 1)
        c = synth_clip(SynthSpec(n_per_class=2, rng_seed=4), "fake", 1)
        np.testing.assert_array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, c.samples)
        assert a.id == "synth/fake_0001"

    def test_clip_shape(self):
        """Test duration, rate and peak normalization."""
        clip = synth_clip(SynthSpec(duration=0.5), "real", 0)
        assert len(clip) == 8000
        assert clip.sample_rate == 16000
        assert np.abs(clip.samples).max() == pytest.approx(0.5)

    def test_hiss_artifact(self):
        """Test that fake clips carry more 5-7 kHz energy than real ones."""
        spec = SynthSpec(artifact_kind="hf_hiss")
        for i in range(3):
            real = band_energy(synth_clip(spec, "real", i), 5000, 7000)
            fake = band_energy(synth_clip(spec, "fake", i), 5000, 7000)
            assert fake > 10 * real

    def test_notch_artifact(self):
        """Test that the notch empties the 2-2.5 kHz band."""
        clip = synth_clip(SynthSpec(artifact_kind="spectral_notch"), "fake", 0)
        assert band_energy(clip, 2000, 2500) < 1e-20

    def test_phase_jitter_artifact(self):
        """Test that phase jitter keeps the length and stays finite."""
        spec = SynthSpec(artifact_kind="phase_jitter")
        fake = synth_clip(spec, "fake", 0)
        assert len(fake) == 16000
        assert np.all(np.isfinite(fake.samples))

    def test_spec_validation(self):
        """Test that n_per_class must be positive."""
        with pytest.raises(ValueError):
            SynthSpec(n_per_class=0)


class TestAttackCache:
    """Tests for the attacked-clip cache."""

    def test_statistical_cache_round_trip(self, small_corpus, tmp_path):
        """Test that cached clips are the attack output and a rerun only hits."""
        spec = NoiseSpec(sigma=0.01, seed=2)
        cache = AttackCache(tmp_path)
        attacked = cache_attacked(small_corpus, spec, tmp_path, cache=cache)
        assert (cache.hits, cache.misses) == (0, 20)
        assert [e.label for e in attacked] == [e.label for e in small_corpus]
        assert [e.split for e in attacked] == [e.split for e in small_corpus]

        entry = small_corpus.entries[3]
        original = small_corpus.load_clip(entry)
        expected = noise_add(original, 0.01, clip_seed(spec, original))
        cached = read_wav(attacked.resolve(attacked.entries[3]))
        np.testing.assert_array_equal(cached.samples, expected.samples)

        again = cache_attacked(small_corpus, spec, tmp_path, cache=cache)
        assert cache.hits == 20
        assert again.entries == attacked.entries
        assert load_manifest(attacked.root / f"{spec.key()[:16]}.csv").entries == attacked.entries

    def test_keys_separate_specs(self, small_corpus, tmp_path):
        """Test that different parameters get different files."""
        cache = AttackCache(tmp_path)
        three = cache_attacked(small_corpus, MedianFilterSpec(kernel=3), tmp_path, cache=cache)
        five = cache_attacked(small_corpus, MedianFilterSpec(kernel=5), tmp_path, cache=cache)
        assert {e.path for e in three}.isdisjoint(e.path for e in five)
        clip = small_corpus.load_clip(small_corpus.entries[0])
        cached = read_wav(five.resolve(five.entries[0]))
        np.testing.assert_allclose(cached.samples, median_filter(clip, 5).samples, atol=1e-6)

    def test_key_includes_detector(self):
        """Test that the detector digest changes the key."""
        spec = FgsmSpec(epsilon=0.01)
        assert AttackCache.key(spec, "c", "d1") != AttackCache.key(spec, "c", "d2")
        assert AttackCache.key(spec, "c") == AttackCache.key(spec, "c")

    def test_optimization_cache(self, small_corpus, tmp_path):
        """Test that optimization attacks are cached per detector."""
        spec = FgsmSpec(epsilon=0.01)
        test_only = small_corpus.filter(split="test")
        first = cache_attacked(test_only, spec, tmp_path, det=RawTinyDetector(input_len=1024, seed=0))
        second = cache_attacked(test_only, spec, tmp_path, det=RawTinyDetector(input_len=1024, seed=1))
        assert len(first) == 2
        assert {e.path for e in first}.isdisjoint(e.path for e in second)

    def test_optimization_needs_detector(self, small_corpus, tmp_path):
        """Test that optimization attacks without a detector are a configuration error."""
        with pytest.raises(ConfigError):
            cache_attacked(small_corpus, FgsmSpec(epsilon=0.01), tmp_path)

    def test_manifest_type(self, small_corpus, tmp_path):
        """Test that the attacked manifest is rooted in the kind directory."""
        attacked = cache_attacked(small_corpus, MedianFilterSpec(kernel=3), tmp_path)
        assert isinstance(attacked, Manifest)
        assert attacked.root == tmp_path / "median_filter"
