"""Gradient-based anti-forensic attacks: FGSM, PGD, Carlini-Wagner and DeepFool.

All attacks work in waveform space. For spectrogram detectors the gradient
flows through the differentiable log-mel front-end. Outputs are not clamped
to [-1, 1].
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import torch

from afbench.attacks.specs import CwSpec, DeepFoolSpec, FgsmSpec, OptAttackSpec, PgdSpec
from afbench.audio.core import AudioClip
from afbench.detectors.base import BaseDetector, label_index
from afbench.detectors.gradients import LossKind, loss_and_input_grad
from afbench.errors import ConfigError, DegenerateGradientError

__all__ = [
    "DEGENERATE_NORM",
    "CwResult",
    "DeepFoolResult",
    "apply_optimization",
    "cw",
    "deepfool",
    "fgsm",
    "pgd",
    "run_cw",
    "run_deepfool",
]

logger = logging.getLogger(__name__)

DEGENERATE_NORM = 1e-12


def fgsm(
    det: BaseDetector, clip: AudioClip, y: str | int, epsilon: float, loss: LossKind | None = None
) -> AudioClip:
    """One signed-gradient step ``A + epsilon * sign(dJ/dA)``; ``sign(0) = 0``."""
    if epsilon < 0:
        raise ConfigError(f"epsilon must be non-negative, got {epsilon}")
    if epsilon == 0:
        return clip.with_samples(clip.samples)
    _, grad = loss_and_input_grad(det, clip, y, loss)
    return clip.with_samples(clip.samples + epsilon * np.sign(grad))


def pgd(
    det: BaseDetector,
    clip: AudioClip,
    y: str | int,
    epsilon: float,
    steps: int = 20,
    alpha: float | None = None,
    seed: int = 0,
    loss: LossKind | None = None,
) -> AudioClip:
    """L-infinity projected gradient ascent from a uniform random start.

    :param alpha: Per-step size; defaults to ``2.5 * epsilon / steps``.
    :param seed: Seeds the ``U(-epsilon, epsilon)`` initial perturbation.
    """
    if epsilon < 0:
        raise ConfigError(f"epsilon must be non-negative, got {epsilon}")
    if steps < 1:
        raise ConfigError(f"steps must be >= 1, got {steps}")
    alpha = 2.5 * epsilon / steps if alpha is None else alpha
    original = clip.samples
    rng = np.random.default_rng(seed)
    delta = rng.uniform(-epsilon, epsilon, len(clip)) if epsilon > 0 else np.zeros(len(clip))
    for _ in range(steps):
        _, grad = loss_and_input_grad(det, clip.with_samples(original + delta), y, loss)
        delta = np.clip(delta + alpha * np.sign(grad), -epsilon, epsilon)
    return clip.with_samples(original + delta)


@dataclass(frozen=True)
class CwResult:
    clip: AudioClip
    perturbation: np.ndarray
    feasible: bool
    best_norms: tuple[float, ...]


def _margin(logits: torch.Tensor, y: int) -> torch.Tensor:
    # Logit gap of the true class over the (only) other class.
    return logits[y] - logits[1 - y]


def run_cw(
    det: BaseDetector,
    clip: AudioClip,
    y: str | int,
    c: float,
    k: float = 0.0,
    iters: int = 100,
    lr: float = 0.005,
) -> CwResult:
    """Minimize ``|delta|^2 + c * max(Z_y - Z_other, -k)`` with Adam from ``delta = 0``.

    Returns the smallest-norm iterate with ``f <= -k`` if any, else the final iterate.
    ``best_norms`` lists the norm each time the best feasible iterate improved.
    """
    if c < 0:
        raise ConfigError(f"c must be non-negative, got {c}")
    y = label_index(y)
    x = clip.tensor()
    delta = torch.zeros_like(x, requires_grad=True)
    optimizer = torch.optim.Adam([delta], lr=lr)
    best: np.ndarray | None = None
    best_norms: list[float] = []

    def consider(f_value: float) -> None:
        nonlocal best
        if f_value > -k:
            return
        norm = float(torch.linalg.vector_norm(delta.detach()))
        if best is None or norm < best_norms[-1]:
            best = delta.detach().numpy().copy()
            best_norms.append(norm)

    for _ in range(iters):
        optimizer.zero_grad()
        f = torch.clamp(_margin(det(x + delta)[0], y), min=-k)
        consider(float(f.detach()))
        objective = torch.sum(delta**2) + c * f
        (delta.grad,) = torch.autograd.grad(objective, delta)
        optimizer.step()
    with torch.no_grad():
        consider(float(torch.clamp(_margin(det(x + delta)[0], y), min=-k)))

    feasible = best is not None
    perturbation = best if feasible else delta.detach().numpy().copy()
    if not feasible:
        logger.debug("C&W found no iterate with margin <= -%g for clip %s", k, clip.id)
    return CwResult(
        clip=clip.with_samples(clip.samples + perturbation),
        perturbation=perturbation,
        feasible=feasible,
        best_norms=tuple(best_norms),
    )


def cw(
    det: BaseDetector,
    clip: AudioClip,
    y: str | int,
    c: float,
    k: float = 0.0,
    iters: int = 100,
    lr: float = 0.005,
) -> AudioClip:
    """Carlini-Wagner L2 attack targeting the class opposite to ``y``."""
    return run_cw(det, clip, y, c, k=k, iters=iters, lr=lr).clip


@dataclass(frozen=True)
class DeepFoolResult:
    clip: AudioClip
    perturbation: np.ndarray
    iterations: int
    flipped: bool


def run_deepfool(
    det: BaseDetector,
    clip: AudioClip,
    max_iters: int = 50,
    overshoot: float = 0.02,
    label: str | int | None = None,
) -> DeepFoolResult:
    """Binary DeepFool: step to the linearized boundary between class ``k`` and the other class.

    ``k`` is ``label`` when given, otherwise the clip's current prediction. The loop
    stops as soon as ``A + (1 + overshoot) * sum(r)`` is no longer predicted as ``k``.

    :raises DegenerateGradientError: If the logit-difference gradient vanishes.
    """
    if max_iters < 1:
        raise ConfigError(f"max_iters must be >= 1, got {max_iters}")
    if overshoot < 0:
        raise ConfigError(f"overshoot must be non-negative, got {overshoot}")
    x = clip.tensor()
    total = torch.zeros_like(x)
    k: int | None = None if label is None else label_index(label)
    iterations = 0
    flipped = False
    for _ in range(max_iters + 1):
        point = (x + (1.0 + overshoot) * total).requires_grad_(True)
        logits = det(point)[0]
        predicted = int(torch.argmax(logits))
        if k is None:
            k = predicted
        if predicted != k:
            flipped = True
            break
        if iterations == max_iters:
            break
        gap = logits[k] - logits[1 - k]
        (w,) = torch.autograd.grad(gap, point)
        norm_sq = float(torch.sum(w * w))
        if norm_sq < DEGENERATE_NORM**2:
            raise DegenerateGradientError(
                f"gradient of the logit gap vanished at iteration {iterations} for clip {clip.id!r}"
            )
        total = total - (float(gap.detach()) / norm_sq) * w.detach()
        iterations += 1
    perturbation = ((1.0 + overshoot) * total).numpy()
    return DeepFoolResult(
        clip=clip.with_samples(clip.samples + perturbation),
        perturbation=perturbation,
        iterations=iterations,
        flipped=flipped,
    )


def deepfool(
    det: BaseDetector,
    clip: AudioClip,
    max_iters: int = 50,
    overshoot: float = 0.02,
    label: str | int | None = None,
) -> AudioClip:
    return run_deepfool(det, clip, max_iters, overshoot, label).clip


def apply_optimization(
    det: BaseDetector, clip: AudioClip, y: str | int, spec: OptAttackSpec, seed: int | None = None
) -> AudioClip:
    """Dispatch an optimization spec; ``seed`` overrides the PGD spec's own seed."""
    if isinstance(spec, FgsmSpec):
        return fgsm(det, clip, y, spec.epsilon)
    if isinstance(spec, PgdSpec):
        return pgd(
            det,
            clip,
            y,
            spec.epsilon,
            steps=spec.steps,
            alpha=spec.step_size,
            seed=spec.seed if seed is None else seed,
        )
    if isinstance(spec, CwSpec):
        return cw(det, clip, y, spec.c, k=spec.k, iters=spec.iters, lr=spec.lr)
    if isinstance(spec, DeepFoolSpec):
        return deepfool(det, clip, max_iters=spec.max_iters, overshoot=spec.overshoot)
    raise ConfigError(f"not an optimization attack: {spec!r}")
