"""Pytest tests for the statistical attacks and attack specs."""

import numpy as np
import pytest

from afbench.attacks.specs import (
    ATTACK_KINDS,
    DEFAULT_GRIDS,
    MedianFilterSpec,
    NoiseSpec,
    PgdSpec,
    PitchShiftSpec,
    QuantizeSpec,
    derive_seed,
    iter_grid,
    make_spec,
    parse_spec,
    resolve_kind,
)
from afbench.attacks.statistical import (
    apply_statistical,
    median_filter,
    noise_add,
    pitch_shift,
    quantize,
)
from afbench.audio.core import AudioClip
from afbench.errors import ConfigError

BIN_HZ = 16000 / 512


def peak_frequency(clip: AudioClip) -> float:
    spectrum = np.abs(np.fft.rfft(clip.samples))
    return np.fft.rfftfreq(len(clip), 1.0 / clip.sample_rate)[np.argmax(spectrum)]


def brute_median(x: np.ndarray, n: int) -> np.ndarray:
    half = n // 2
    padded = np.concatenate([np.full(half, x[0]), x, np.full(half, x[-1])])
    return np.array([sorted(padded[i : i + n])[half] for i in range(len(x))])


class TestPitchShift:
    """Tests for pitch shifting."""

    def test_zero_is_identity(self, tone):
        """Test that n = 0 returns the input samples exactly."""
        np.testing.assert_array_equal(pitch_shift(tone, 0).samples, tone.samples)

    def test_octave_up(self, tone):
        """Test that +12 semitones moves 440 Hz to 880 Hz."""
        out = pitch_shift(tone, 12)
        assert len(out) == len(tone)
        assert abs(peak_frequency(out) - 880.0) <= BIN_HZ

    def test_octave_down(self, tone):
        """Test that -12 semitones moves 440 Hz to 220 Hz."""
        out = pitch_shift(tone, -12)
        assert len(out) == len(tone)
        assert abs(peak_frequency(out) - 220.0) <= BIN_HZ

    @pytest.mark.parametrize("n", [1, -1, 5, -5])
    def test_grid_values_keep_length_and_rate(self, tone, n):
        """Test that the grid semitones keep length, rate and id."""
        out = pitch_shift(tone, n)
        assert len(out) == len(tone)
        assert out.sample_rate == tone.sample_rate
        assert out.id == tone.id
        assert abs(peak_frequency(out) - 440.0 * 2 ** (n / 12)) <= BIN_HZ

    def test_range_limit(self, tone):
        """Test that more than two octaves is rejected."""
        with pytest.raises(ConfigError):
            pitch_shift(tone, 25)


class TestMedianFilter:
    """Tests for the median filter."""

    def test_worked_example(self):
        """Test [3, 1, 2, 5, 4] with N = 3."""
        out = median_filter(AudioClip(np.array([3.0, 1.0, 2.0, 5.0, 4.0]), 16000), 3)
        np.testing.assert_array_equal(out.samples, [3, 2, 2, 4, 4])

    def test_constant_unchanged(self):
        """Test that a constant signal passes through."""
        clip = AudioClip(np.full(50, 0.25), 16000)
        np.testing.assert_array_equal(median_filter(clip, 7).samples, clip.samples)

    def test_impulse_removed(self):
        """Test that a single impulse is rejected."""
        x = np.zeros(21)
        x[10] = 1.0
        assert np.all(median_filter(AudioClip(x, 16000), 3).samples == 0.0)

    @pytest.mark.parametrize("n", [3, 5, 7, 9])
    def test_matches_brute_force(self, rng, n):
        """Test against sorting each replicate-padded window."""
        x = rng.normal(size=101)
        out = median_filter(AudioClip(x, 16000), n)
        np.testing.assert_array_equal(out.samples, brute_median(x, n))

    def test_monotone(self, rng):
        """Test that x <= y pointwise implies filtered x <= filtered y."""
        x = rng.normal(size=200)
        y = x + rng.uniform(0, 1, 200)
        fx = median_filter(AudioClip(x, 16000), 5).samples
        fy = median_filter(AudioClip(y, 16000), 5).samples
        assert np.all(fx <= fy)

    def test_idempotent_on_long_segments(self):
        """Test that piecewise-constant segments longer than N are fixed points."""
        x = np.repeat([0.1, -0.4, 0.7, 0.0], 12)
        out = median_filter(AudioClip(x, 16000), 5).samples
        np.testing.assert_array_equal(out, x)

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_invalid_kernel(self, tone, n):
        """Test that even or too-small kernels are rejected."""
        with pytest.raises(ConfigError):
            median_filter(tone, n)


class TestNoiseAdd:
    """Tests for Gaussian noise addition."""

    def test_zero_sigma_is_identity(self, tone):
        """Test that sigma = 0 leaves the samples unchanged."""
        np.testing.assert_array_equal(noise_add(tone, 0.0, 7).samples, tone.samples)

    def test_variance_and_mean(self, tone):
        """Test the sample variance and mean of the added noise."""
        delta = noise_add(tone, 0.01, 42).samples - tone.samples
        assert 0.8e-4 <= delta.var() <= 1.2e-4
        assert abs(delta.mean()) <= 5 * 0.01 / np.sqrt(len(delta))

    def test_deterministic(self, tone):
        """Test that the same seed gives identical output and another seed differs."""
        a = noise_add(tone, 0.02, 5).samples
        b = noise_add(tone, 0.02, 5).samples
        c = noise_add(tone, 0.02, 6).samples
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_not_clipped(self):
        """Test that noise may push samples past full scale."""
        clip = AudioClip(np.full(1000, 0.999), 16000)
        assert noise_add(clip, 0.05, 0).samples.max() > 1.0

    def test_negative_sigma(self, tone):
        """Test that a negative sigma is rejected."""
        with pytest.raises(ConfigError):
            noise_add(tone, -0.1, 0)


class TestQuantize:
    """Tests for uniform quantization."""

    def test_endpoints_fixed(self):
        """Test that -1 and 1 map to themselves."""
        for b in (2, 4, 6, 8):
            out = quantize(AudioClip(np.array([-1.0, 1.0]), 16000), b).samples
            np.testing.assert_allclose(out, [-1.0, 1.0], atol=1e-15)

    def test_worked_example(self):
        """Test that 0.3 at 4 bits becomes 9/7 - 1."""
        out = quantize(AudioClip(np.array([0.3]), 16000), 4).samples
        assert out[0] == pytest.approx(9 / 7 - 1, abs=1e-12)

    def test_half_rounds_away_from_zero(self):
        """Test exact halves at two bits, where (A + 1) lands on 0.5 and 1.5."""
        out = quantize(AudioClip(np.array([-0.5, 0.5]), 16000), 2).samples
        np.testing.assert_array_equal(out, [0.0, 1.0])

    def test_clamps_input(self):
        """Test that out-of-range samples are clamped first."""
        out = quantize(AudioClip(np.array([1.7, -3.0]), 16000), 6).samples
        np.testing.assert_allclose(out, [1.0, -1.0], atol=1e-15)

    @pytest.mark.parametrize("b", [4, 6, 8])
    def test_idempotent_and_bounded(self, rng, b):
        """Test idempotence and the per-sample error bound."""
        clip = AudioClip(rng.uniform(-1, 1, 2000), 16000)
        once = quantize(clip, b)
        twice = quantize(once, b)
        np.testing.assert_array_equal(twice.samples, once.samples)
        assert np.abs(once.samples - clip.samples).max() <= 1 / (2 ** (b - 1) - 1)
        assert len(np.unique(once.samples)) <= 2**b

    def test_invalid_depth(self, tone):
        """Test that b < 2 is rejected."""
        with pytest.raises(ConfigError):
            quantize(tone, 1)


class TestAttackSpecs:
    """Tests for spec parsing, grids and dispatch."""

    def test_make_spec_and_aliases(self):
        """Test building specs from kinds and short aliases."""
        spec = make_spec("pitch", 5)
        assert isinstance(spec, PitchShiftSpec)
        assert spec.semitones == 5
        assert spec.parameter == 5
        assert resolve_kind("noise") == "noise_add"
        assert make_spec("fgsm", 0.1).label() == "fgsm(epsilon=0.1)"

    def test_unknown_kind(self):
        """Test that an unknown attack name is a configuration error."""
        with pytest.raises(ConfigError):
            resolve_kind("reverb")

    def test_invalid_spec(self):
        """Test that invalid parameters surface as configuration errors."""
        with pytest.raises(ConfigError):
            parse_spec({"kind": "median_filter", "kernel": 4})
        with pytest.raises(ConfigError):
            parse_spec({"kind": "quantize", "bits": 1})
        with pytest.raises(ConfigError):
            parse_spec({"kind": "fgsm", "epsilon": 0.1, "steps": 3})

    def test_grids_cover_every_kind(self):
        """Test that every kind has a grid and iter_grid sorts it."""
        assert set(DEFAULT_GRIDS) == set(ATTACK_KINDS)
        values = [spec.parameter for spec in iter_grid("fgsm")]
        assert values == sorted(DEFAULT_GRIDS["fgsm"])
        assert len(iter_grid("median")) == 4

    def test_pgd_step_size(self):
        """Test the default PGD step size."""
        assert PgdSpec(epsilon=0.03).step_size == pytest.approx(2.5 * 0.03 / 20)
        assert PgdSpec(epsilon=0.03, alpha=0.01).step_size == 0.01

    def test_key_is_stable(self):
        """Test that equal specs share a key and different ones do not."""
        assert NoiseSpec(sigma=0.01).key() == NoiseSpec(sigma=0.01).key()
        assert NoiseSpec(sigma=0.01).key() != NoiseSpec(sigma=0.02).key()

    def test_derive_seed(self):
        """Test per-clip seeds."""
        assert derive_seed(0, "a") == derive_seed(0, "a")
        assert derive_seed(0, "a") != derive_seed(0, "b")
        assert derive_seed(0, "a") != derive_seed(1, "a")
        assert 0 <= derive_seed(3, "x") < 2**64

    def test_apply_statistical_dispatch(self, tone):
        """Test that dispatch matches the direct calls."""
        cases = [
            (MedianFilterSpec(kernel=5), median_filter(tone, 5)),
            (QuantizeSpec(bits=6), quantize(tone, 6)),
            (NoiseSpec(sigma=0.01, seed=9), noise_add(tone, 0.01, 9)),
        ]
        for spec, expected in cases:
            np.testing.assert_array_equal(apply_statistical(tone, spec).samples, expected.samples)

    def test_apply_statistical_seed_override(self, tone):
        """Test that an explicit seed replaces the noise spec's seed."""
        out = apply_statistical(tone, NoiseSpec(sigma=0.01, seed=9), seed=11)
        np.testing.assert_array_equal(out.samples, noise_add(tone, 0.01, 11).samples)

    def test_apply_statistical_rejects_optimization(self, tone):
        """Test that optimization specs are not dispatched here."""
        with pytest.raises(ConfigError):
            apply_statistical(tone, make_spec("fgsm", 0.01))
