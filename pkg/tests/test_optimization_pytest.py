"""Pytest tests for the gradient-based attacks and the batch executor."""

import numpy as np
import pytest

from afbench.attacks.batch import attack_batch, attack_clip, clip_seed
from afbench.attacks.optimization import (
    apply_optimization,
    cw,
    fgsm,
    pgd,
    run_cw,
    run_deepfool,
)
from afbench.attacks.specs import (
    DEFAULT_GRIDS,
    CwSpec,
    DeepFoolSpec,
    FgsmSpec,
    NoiseSpec,
    PgdSpec,
    make_spec,
)
from afbench.attacks.statistical import noise_add
from afbench.audio.core import AudioClip
from afbench.detectors.gradients import forward, loss_and_input_grad, predict_labels
from afbench.errors import ConfigError, DegenerateGradientError

N = 64


@pytest.fixture
def weights(rng):
    """Equal-magnitude weights with random signs."""
    return 0.5 * rng.choice([-1.0, 1.0], size=N)


@pytest.fixture
def samples(rng):
    return rng.normal(0, 0.2, N)


def with_gap(make_linear, w, samples, gap):
    """Linear detector whose fake-minus-real logit is ``gap`` at ``samples``."""
    return make_linear(w, gap - float(w @ samples))


class TestFgsm:
    """Tests for the fast gradient sign method."""

    def test_zero_epsilon_is_identity(self, raw_detector, rng):
        """Test that epsilon = 0 returns the clip unchanged."""
        clip = AudioClip(rng.normal(size=1024), 16000)
        np.testing.assert_array_equal(fgsm(raw_detector, clip, "fake", 0.0).samples, clip.samples)

    def test_sign_step_structure(self, raw_detector, rng):
        """Test that every sample moves by exactly +-epsilon or 0."""
        clip = AudioClip(rng.normal(0, 0.3, 1024), 16000)
        delta = fgsm(raw_detector, clip, "fake", 0.01).samples - clip.samples
        magnitudes = np.abs(delta)
        assert np.all(np.isclose(magnitudes, 0.01, atol=1e-12) | (magnitudes == 0.0))

    @pytest.mark.parametrize("label,direction", [("real", 1.0), ("fake", -1.0)])
    def test_linear_closed_form(self, make_linear, weights, samples, label, direction):
        """Test the perturbation epsilon * sign(w) * s on a linear model."""
        det = make_linear(weights, 0.3)
        clip = AudioClip(samples, 16000)
        delta = fgsm(det, clip, label, 0.05).samples - samples
        np.testing.assert_allclose(delta, 0.05 * direction * np.sign(weights), atol=1e-12)

    def test_increases_loss(self, make_linear, weights, samples):
        """Test that the step raises the loss on a linear model."""
        det = make_linear(weights, 0.0)
        clip = AudioClip(samples, 16000)
        before, _ = loss_and_input_grad(det, clip, "fake")
        after, _ = loss_and_input_grad(det, fgsm(det, clip, "fake", 0.01), "fake")
        assert after > before

    def test_negative_epsilon(self, raw_detector, noise_clip):
        """Test that a negative budget is rejected."""
        with pytest.raises(ConfigError):
            fgsm(raw_detector, noise_clip, "fake", -0.1)


class TestPgd:
    """Tests for projected gradient descent."""

    def test_zero_epsilon_is_identity(self, raw_detector, rng):
        """Test that epsilon = 0 pins the iterate to the clip."""
        clip = AudioClip(rng.normal(size=1024), 16000)
        np.testing.assert_array_equal(pgd(raw_detector, clip, "fake", 0.0).samples, clip.samples)

    @pytest.mark.parametrize("epsilon", [0.003, 0.015, 0.06])
    def test_budget(self, raw_detector, rng, epsilon):
        """Test that max |A' - A| <= epsilon."""
        clip = AudioClip(rng.normal(0, 0.3, 1024), 16000)
        out = pgd(raw_detector, clip, "real", epsilon, steps=5, seed=3)
        assert np.abs(out.samples - clip.samples).max() <= epsilon + 1e-12

    def test_deterministic(self, raw_detector, noise_clip):
        """Test that a fixed seed reproduces the output and another seed changes it."""
        a = pgd(raw_detector, noise_clip, "fake", 0.01, steps=3, seed=1).samples
        b = pgd(raw_detector, noise_clip, "fake", 0.01, steps=3, seed=1).samples
        c = pgd(raw_detector, noise_clip, "fake", 0.01, steps=1, alpha=0.0, seed=2).samples
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    @pytest.mark.parametrize("label", ["real", "fake"])
    def test_dominates_fgsm_on_linear_model(self, make_linear, weights, samples, seed, label):
        """Test that PGD reaches at least the FGSM loss at equal epsilon."""
        det = make_linear(weights, 0.1)
        clip = AudioClip(samples, 16000)
        loss_pgd, _ = loss_and_input_grad(det, pgd(det, clip, label, 0.03, seed=seed), label)
        loss_fgsm, _ = loss_and_input_grad(det, fgsm(det, clip, label, 0.03), label)
        assert loss_pgd >= loss_fgsm - 1e-12

    def test_invalid_steps(self, raw_detector, noise_clip):
        """Test that zero steps is rejected."""
        with pytest.raises(ConfigError):
            pgd(raw_detector, noise_clip, "fake", 0.01, steps=0)


class TestCarliniWagner:
    """Tests for the Carlini-Wagner L2 attack."""

    def test_zero_c_is_identity(self, make_linear, weights, samples):
        """Test that c = 0 leaves delta at zero."""
        det = with_gap(make_linear, weights, samples, 1.0)
        clip = AudioClip(samples, 16000)
        np.testing.assert_array_equal(cw(det, clip, "fake", 0.0, iters=20).samples, samples)

    def test_already_misclassified_is_identity(self, make_linear, weights, samples):
        """Test that a clip already past the margin is returned unchanged."""
        det = with_gap(make_linear, weights, samples, -1.0)
        result = run_cw(det, AudioClip(samples, 16000), "fake", 10.0, iters=20)
        assert result.feasible
        np.testing.assert_array_equal(result.clip.samples, samples)
        assert result.best_norms == (0.0,)

    def test_hyperplane_distance(self, make_linear, weights, samples):
        """Test that the converged norm is within 5% of g / |w|."""
        det = with_gap(make_linear, weights, samples, 2.0)
        result = run_cw(det, AudioClip(samples, 16000), "fake", 10.0, iters=500, lr=0.001)
        distance = 2.0 / np.linalg.norm(weights)
        assert result.feasible
        assert abs(np.linalg.norm(result.perturbation) - distance) <= 0.05 * distance
        assert int(np.argmax(forward(det, result.clip))) == 0

    def test_best_norms_non_increasing(self, make_linear, weights, samples):
        """Test that recorded best iterates never grow."""
        det = with_gap(make_linear, weights, samples, 1.0)
        result = run_cw(det, AudioClip(samples, 16000), "fake", 25.0, iters=200, lr=0.002)
        assert result.best_norms
        assert all(b <= a for a, b in zip(result.best_norms, result.best_norms[1:]))

    def test_infeasible_returns_final_iterate(self, make_linear, weights, samples):
        """Test that a budget too small to cross reports infeasibility."""
        det = with_gap(make_linear, weights, samples, 50.0)
        result = run_cw(det, AudioClip(samples, 16000), "fake", 1.0, iters=3, lr=0.001)
        assert not result.feasible
        assert np.linalg.norm(result.perturbation) > 0

    def test_negative_c(self, make_linear, weights, samples):
        """Test that a negative trade-off constant is rejected."""
        with pytest.raises(ConfigError):
            cw(make_linear(weights), AudioClip(samples, 16000), "fake", -1.0)


class TestDeepFool:
    """Tests for binary DeepFool."""

    def test_linear_model_one_step(self, make_linear, weights, samples):
        """Test one-step convergence with |r| equal to the hyperplane distance."""
        det = with_gap(make_linear, weights, samples, 0.8)
        result = run_deepfool(det, AudioClip(samples, 16000), overshoot=0.02)
        distance = 0.8 / np.linalg.norm(weights)
        assert result.iterations == 1
        assert result.flipped
        assert abs(np.linalg.norm(result.perturbation) / 1.02 - distance) <= 1e-9
        assert int(np.argmax(forward(det, result.clip))) == 0

    def test_overshoot_scales_perturbation(self, make_linear, weights, samples):
        """Test that the overshoot multiplies the accumulated step exactly."""
        det = with_gap(make_linear, weights, samples, -0.6)
        clip = AudioClip(samples, 16000)
        small = run_deepfool(det, clip, overshoot=0.02)
        large = run_deepfool(det, clip, overshoot=0.05)
        assert small.iterations == large.iterations == 1
        np.testing.assert_allclose(large.perturbation, small.perturbation * 1.05 / 1.02, rtol=1e-12)
        assert int(np.argmax(forward(det, large.clip))) == 1

    def test_already_other_class(self, make_linear, weights, samples):
        """Test that a clip not predicted as the given label is left alone."""
        det = with_gap(make_linear, weights, samples, 0.8)
        result = run_deepfool(det, AudioClip(samples, 16000), label="real")
        assert result.iterations == 0
        np.testing.assert_array_equal(result.clip.samples, samples)

    def test_degenerate_gradient(self, make_linear, samples):
        """Test that a constant detector raises a degenerate-gradient error."""
        det = make_linear(np.zeros(N), 0.0)
        with pytest.raises(DegenerateGradientError):
            run_deepfool(det, AudioClip(samples, 16000))

    def test_flips_reference_detector(self, raw_detector, rng):
        """Test that a success changes the prediction of a nonlinear detector."""
        clip = AudioClip(rng.normal(0, 0.3, 1024), 16000)
        result = run_deepfool(raw_detector, clip, overshoot=0.05)
        if result.flipped:
            before = predict_labels(raw_detector, [clip])[0]
            after = predict_labels(raw_detector, [result.clip])[0]
            assert before != after


class TestAttackBatch:
    """Tests for the batch executor and dispatch."""

    def test_empty_batch(self, raw_detector):
        """Test that an empty batch gives an empty result."""
        result = attack_batch(raw_detector, [], FgsmSpec(epsilon=0.1))
        assert len(result) == 0
        assert result.success_rate == 0.0

    def test_zero_epsilon_never_succeeds(self, make_linear, weights, rng):
        """Test that epsilon = 0 flips nothing when every margin is positive."""
        det = make_linear(weights, 5.0)
        clips = [AudioClip(rng.normal(0, 0.01, N), 16000, f"c{i}") for i in range(5)]
        result = attack_batch(det, clips, FgsmSpec(epsilon=0.0))
        assert result.success == [False] * 5

    def test_matches_single_clip_calls(self, raw_detector, rng):
        """Test that a threaded batch equals elementwise calls on 10 clips."""
        clips = [AudioClip(rng.normal(0, 0.3, 1024), 16000, f"c{i}") for i in range(10)]
        labels = ["real", "fake"] * 5
        spec = PgdSpec(epsilon=0.01, steps=3, seed=4)
        result = attack_batch(raw_detector, clips, spec, labels=labels, workers=4)
        for clip, label, attacked in zip(clips, labels, result.clips):
            expected = attack_clip(raw_detector, clip, spec, label)
            np.testing.assert_array_equal(attacked.samples, expected.samples)
            assert attacked.id == clip.id

    @pytest.mark.parametrize("detector", ["linear", pytest.param("raw", marks=pytest.mark.slow)])
    @pytest.mark.parametrize("kind", ["fgsm", "pgd"])
    def test_budget_over_default_grid(self, make_linear, weights, raw_detector, rng, detector, kind):
        """Test max |A' - A| <= epsilon on 200 clips for every default grid epsilon."""
        det = make_linear(weights, 0.0) if detector == "linear" else raw_detector
        clips = [AudioClip(rng.normal(0, 0.3, det.input_len), 16000, f"c{i}") for i in range(200)]
        labels = ["real", "fake"] * 100
        for epsilon in DEFAULT_GRIDS[kind]:
            result = attack_batch(det, clips, make_spec(kind, epsilon), labels=labels, workers=4)
            assert not result.errors
            worst = max(np.abs(a.samples - c.samples).max() for a, c in zip(result.clips, clips))
            assert worst <= epsilon + 1e-12, epsilon

    def test_deepfool_flips_linear_batch(self, make_linear, weights, rng):
        """Test that DeepFool succeeds on every clip of a linear model."""
        det = make_linear(weights, 0.0)
        clips = [AudioClip(rng.normal(0, 0.2, N), 16000, f"c{i}") for i in range(6)]
        result = attack_batch(det, clips, DeepFoolSpec(overshoot=0.02), workers=2)
        assert result.success == [True] * 6
        assert result.success_rate == 1.0

    def test_errors_are_recorded(self, make_linear, samples):
        """Test that a failing clip keeps its samples and the batch continues."""
        det = make_linear(np.zeros(N), 0.0)
        clips = [AudioClip(samples, 16000, "a"), AudioClip(-samples, 16000, "b")]
        result = attack_batch(det, clips, DeepFoolSpec())
        assert sorted(result.errors) == [0, 1]
        assert result.success == [False, False]
        np.testing.assert_array_equal(result.clips[1].samples, -samples)

    def test_statistical_specs_use_clip_seeds(self, raw_detector, rng):
        """Test that noise in a batch is seeded per clip."""
        clips = [AudioClip(rng.normal(0, 0.3, 1024), 16000, f"c{i}") for i in range(2)]
        spec = NoiseSpec(sigma=0.01, seed=5)
        result = attack_batch(raw_detector, clips, spec)
        for clip, attacked in zip(clips, result.clips):
            expected = noise_add(clip, 0.01, clip_seed(spec, clip))
            np.testing.assert_array_equal(attacked.samples, expected.samples)
        assert not np.array_equal(
            result.clips[0].samples - clips[0].samples, result.clips[1].samples - clips[1].samples
        )

    def test_clip_seed(self, noise_clip):
        """Test that unseeded attacks get no seed."""
        assert clip_seed(FgsmSpec(epsilon=0.1), noise_clip) is None
        assert clip_seed(PgdSpec(epsilon=0.1, seed=1), noise_clip) is not None

    def test_optimization_needs_detector(self, noise_clip):
        """Test that optimization attacks without a detector fail."""
        with pytest.raises(ConfigError):
            attack_clip(None, noise_clip, FgsmSpec(epsilon=0.1))

    def test_apply_optimization_dispatch(self, make_linear, weights, samples):
        """Test dispatch for every optimization kind."""
        det = with_gap(make_linear, weights, samples, 0.5)
        clip = AudioClip(samples, 16000)
        np.testing.assert_array_equal(
            apply_optimization(det, clip, "fake", FgsmSpec(epsilon=0.02)).samples,
            fgsm(det, clip, "fake", 0.02).samples,
        )
        out = apply_optimization(det, clip, "fake", CwSpec(c=10.0, iters=10))
        assert len(out) == N
        out = apply_optimization(det, clip, "fake", make_spec("deepfool", 0.02))
        assert int(np.argmax(forward(det, out))) == 0
        with pytest.raises(ConfigError):
            apply_optimization(det, clip, "fake", NoiseSpec(sigma=0.1))
