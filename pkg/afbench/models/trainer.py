import logging
import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from datetime import timedelta

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, Field
from torch.optim import Optimizer
from torch.utils.data import DataLoader
from tqdm.auto import tqdm

from afbench.attacks.batch import attack_clip
from afbench.attacks.specs import ATTACK_KINDS, DEFAULT_GRIDS, make_spec, resolve_kind
from afbench.audio.core import AudioClip
from afbench.datasets.clip_dataset import ClipDataset
from afbench.datasets.manifest import Manifest
from afbench.detectors.base import BaseDetector
from afbench.detectors.gradients import LossKind, loss_tensor, score_clips
from afbench.errors import AFBenchError, ConfigError
from afbench.metrics.detection import ScoredSet, roc_auc

logger = logging.getLogger(__name__)


class TrainConfig(BaseModel):
    """Adam schedule.

    Defaults are the desk-scale schedule (10 epochs, batch 8, lr 3e-3) sized for the
    70 training clips of the default synthetic corpus; the full one is 50 epochs,
    batch 256, lr 1e-4.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    epochs: int = Field(default=10, ge=1)
    learning_rate: float = Field(default=3e-3, ge=0)
    batch_size: int = Field(default=8, ge=1)
    weight_decay: float = Field(default=1e-4, ge=0)
    betas: tuple[float, float] = (0.9, 0.999)
    eps_adam: float = Field(default=1e-8, gt=0)
    rng_seed: int = Field(default=0, ge=0, lt=2**64)
    loss: LossKind = LossKind()


class AdversarialAugmenter:
    """Replace a fraction of every batch with attacked copies of its own clips.

    Each replaced clip gets an attack kind drawn uniformly from ``kinds`` and a
    parameter drawn uniformly from that kind's grid. Optimization attacks run
    against the detector as it is at that step, using the true label.
    """

    def __init__(
        self,
        kinds: Sequence[str] = ATTACK_KINDS,
        fraction: float = 0.5,
        seed: int = 0,
        grids: dict[str, Sequence[float]] | None = None,
    ):
        if not 0 <= fraction <= 1:
            raise ConfigError(f"fraction must be in [0, 1], got {fraction}")
        self.kinds = [resolve_kind(kind) for kind in kinds]
        self.fraction = fraction
        self.grids = {kind: tuple((grids or {}).get(kind, DEFAULT_GRIDS[kind])) for kind in self.kinds}
        self.rng = np.random.default_rng([seed, 0xDEF])
        self.failures = 0

    @property
    def enabled(self) -> bool:
        return bool(self.kinds) and self.fraction > 0

    def __call__(
        self, det: BaseDetector, samples: torch.Tensor, labels: torch.Tensor
    ) -> torch.Tensor:
        if not self.enabled:
            return samples
        batch = samples.shape[0]
        count = int(np.floor(self.fraction * batch))
        rows = self.rng.choice(batch, size=count, replace=False)
        out = samples.clone()
        for row in rows:
            kind = self.kinds[int(self.rng.integers(len(self.kinds)))]
            value = self.grids[kind][int(self.rng.integers(len(self.grids[kind])))]
            overrides = {"seed": int(self.rng.integers(2**63))} if kind in ("noise_add", "pgd") else {}
            spec = make_spec(kind, value, **overrides)
            clip = AudioClip(samples[row].numpy(), det.sample_rate, f"batch-row-{row}")
            try:
                attacked = attack_clip(det, clip, spec, int(labels[row]))
            except AFBenchError as e:
                self.failures += 1
                logger.debug("augmentation %s failed: %s", spec.label(), e)
                continue
            out[row] = torch.from_numpy(np.array(attacked.samples, dtype=np.float64))
        return out


@dataclass
class TrainResult:
    detector: BaseDetector
    loss_curve: list[float] = field(default_factory=list)
    dev_auc: list[float] = field(default_factory=list)


class Trainer:
    def __init__(
        self,
        model: BaseDetector,
        train_set: ClipDataset,
        config: TrainConfig | None = None,
        dev_set: tuple[list[AudioClip], list[str]] | None = None,
        augmenter: AdversarialAugmenter | None = None,
    ):
        """Initialize the trainer.

        :param model: Detector to train in place
        :param train_set: Training clips with labels
        :param config: Adam schedule and seed
        :param dev_set: Optional clips and labels whose AUC is logged after each epoch
        :param augmenter: Optional adversarial batch augmentation
        """
        self.model = model
        self.train_set = train_set
        self.config = config or TrainConfig()
        self.dev_set = dev_set
        self.augmenter = augmenter

        n_real, n_fake = train_set.class_counts()
        if n_real == 0 or n_fake == 0:
            raise ConfigError(
                f"training split needs both classes, got {n_real} real and {n_fake} fake clips"
            )
        generator = torch.Generator().manual_seed(self.config.rng_seed)
        self.train_loader = DataLoader(
            train_set, batch_size=self.config.batch_size, shuffle=True, generator=generator
        )
        self.optimizer: Optimizer = torch.optim.AdamW(
            self.model.parameters(),
            lr=self.config.learning_rate,
            betas=self.config.betas,
            eps=self.config.eps_adam,
            weight_decay=self.config.weight_decay,
        )

    def _dev_auc(self) -> float | None:
        if not self.dev_set or not self.dev_set[0]:
            return None
        clips, labels = self.dev_set
        try:
            return roc_auc(ScoredSet.from_lists(score_clips(self.model, clips), labels))
        except AFBenchError as e:
            logger.warning("dev AUC unavailable: %s", e)
            return None

    def train(self) -> TrainResult:
        """Train the model.

        :return: The trained detector with its per-epoch mean training loss.
        """
        result = TrainResult(detector=self.model)
        start_time = time.time()
        logger.info(
            "Training %s detector on %d clips for %d epochs",
            self.model.kind,
            len(self.train_set),
            self.config.epochs,
        )

        for epoch in range(self.config.epochs):
            self.model.train()
            total_loss = 0.0
            seen = 0

            progress_bar = tqdm(self.train_loader, desc=f"Epoch {epoch + 1}", leave=False)
            for batch in progress_bar:
                samples, labels = batch["samples"], batch["labels"]
                if self.augmenter is not None:
                    samples = self.augmenter(self.model, samples, labels)

                self.optimizer.zero_grad()
                loss = loss_tensor(self.model(samples), labels, self.config.loss)
                loss.backward()
                self.optimizer.step()

                total_loss += loss.item() * len(labels)
                seen += len(labels)
                progress_bar.set_postfix(
                    {"loss": f"{loss.item():.4f}", "avg_loss": f"{total_loss / seen:.4f}"}
                )

            avg_loss = total_loss / seen
            result.loss_curve.append(avg_loss)
            self.model.eval()
            dev_auc = self._dev_auc()
            if dev_auc is not None:
                result.dev_auc.append(dev_auc)
                logger.info("Epoch %d: loss %.4f, dev AUC %.4f", epoch + 1, avg_loss, dev_auc)
            else:
                logger.info("Epoch %d: loss %.4f", epoch + 1, avg_loss)

        logger.info("Training completed in %s", timedelta(seconds=int(time.time() - start_time)))
        return result


def train(
    det: BaseDetector,
    manifest: Manifest,
    cfg: TrainConfig | None = None,
    augmenter: AdversarialAugmenter | None = None,
) -> TrainResult:
    """Train ``det`` on the manifest's train split, monitoring the dev split if present.

    :raises ConfigError: If the train split is empty or single-class.
    """
    clips, labels = manifest.load_clips("train")
    if not clips:
        raise ConfigError("manifest has no train split")
    dev = manifest.load_clips("dev")
    trainer = Trainer(det, ClipDataset(clips, labels, det.input_len), cfg, dev_set=dev, augmenter=augmenter)
    return trainer.train()
