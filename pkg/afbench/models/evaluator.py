import logging
from collections import defaultdict
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict
from tqdm.auto import tqdm

from afbench.attacks.batch import attack_batch
from afbench.attacks.specs import AttackSpec
from afbench.audio.core import AudioClip
from afbench.datasets.manifest import Manifest
from afbench.detectors.base import BaseDetector
from afbench.detectors.gradients import score_clips
from afbench.metrics.detection import ScoredSet, accuracy, confusion, eer, roc_auc
from afbench.metrics.quality import quality_scores

# Set up logger
logger = logging.getLogger(__name__)

AVG = "Avg."
BASELINE = "none"
Family = Literal["baseline", "statistical", "optimization"]


class ReportRow(BaseModel):
    """One (detector, dataset, attack setting) evaluation."""

    model_config = ConfigDict(extra="forbid")

    detector: str
    detector_kind: str
    defended: bool = False
    dataset_id: str
    seen: bool
    attack: str
    family: Family
    parameter: float | None = None
    auc: float
    eer: float
    accuracy: float
    tn: int
    fp: int
    fn: int
    tp: int
    waveform_mse: float | None = None
    spectrogram_mse: float | None = None
    ssim: float | None = None
    success_rate: float | None = None
    n_clips: int
    errors: int = 0

    def cell(self) -> str:
        """``AUC / EER`` as printed in the summary tables."""
        return f"{self.auc:.2f} / {self.eer:.2f}"


def _mean(values: Iterable[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def average_rows(members: Sequence[ReportRow], **labels) -> ReportRow:
    """Arithmetic mean of the metrics of ``members``; confusion counts and clip counts are summed."""
    first = members[0]
    return ReportRow(
        detector=labels.get("detector", first.detector),
        detector_kind=labels.get("detector_kind", first.detector_kind),
        defended=labels.get("defended", first.defended),
        dataset_id=labels.get("dataset_id", AVG),
        seen=labels.get("seen", all(row.seen for row in members)),
        attack=labels.get("attack", first.attack),
        family=labels.get("family", first.family),
        parameter=labels.get("parameter", first.parameter),
        auc=_mean(row.auc for row in members),
        eer=_mean(row.eer for row in members),
        accuracy=_mean(row.accuracy for row in members),
        tn=sum(row.tn for row in members),
        fp=sum(row.fp for row in members),
        fn=sum(row.fn for row in members),
        tp=sum(row.tp for row in members),
        waveform_mse=_mean(row.waveform_mse for row in members),
        spectrogram_mse=_mean(row.spectrogram_mse for row in members),
        ssim=_mean(row.ssim for row in members),
        success_rate=_mean(row.success_rate for row in members),
        n_clips=sum(row.n_clips for row in members),
        errors=sum(row.errors for row in members),
    )


def sort_key(row: ReportRow) -> tuple:
    families = ("baseline", "statistical", "optimization")
    parameter = float("-inf") if row.parameter is None else row.parameter
    return (
        row.detector,
        families.index(row.family),
        row.attack,
        parameter,
        row.dataset_id == AVG,
        row.dataset_id,
    )


def compute_averages(rows: Sequence[ReportRow]) -> list[ReportRow]:
    """Dataset, attack-family and detector-category averages.

    - ``dataset_id == "Avg."``: per detector and attack setting, over datasets.
    - ``attack == "<family> avg"``: per detector and dataset, over a family's settings.
    - ``detector == "<kind> avg"``: per detector kind, defense status and setting, over detectors.
    """
    averages: list[ReportRow] = []
    by_setting: dict[tuple, list[ReportRow]] = defaultdict(list)
    by_family: dict[tuple, list[ReportRow]] = defaultdict(list)
    by_kind: dict[tuple, list[ReportRow]] = defaultdict(list)
    for row in rows:
        by_setting[(row.detector, row.attack, row.parameter)].append(row)
        if row.family != "baseline":
            by_family[(row.detector, row.family, row.dataset_id)].append(row)
        by_kind[(row.detector_kind, row.defended, row.attack, row.parameter)].append(row)

    for members in by_setting.values():
        averages.append(average_rows(members))
    for (_, family, dataset_id), members in by_family.items():
        averages.append(
            average_rows(members, attack=f"{family} avg", parameter=None, dataset_id=dataset_id)
        )
    for (kind, defended, _, _), members in by_kind.items():
        if len({row.detector for row in members}) > 1:
            averages.append(average_rows(members, detector=f"{kind} avg"))
    return sorted(averages, key=sort_key)


class EvalReport(BaseModel):
    """Evaluation rows plus the averages derived from them."""

    schema_name: Literal["afbench-report"] = "afbench-report"
    version: Literal[1] = 1
    rows: list[ReportRow]
    averages: list[ReportRow] = []

    @classmethod
    def from_rows(cls, rows: Iterable[ReportRow]) -> "EvalReport":
        ordered = sorted(rows, key=sort_key)
        return cls(rows=ordered, averages=compute_averages(ordered))

    def datasets(self) -> list[str]:
        return sorted({row.dataset_id for row in self.rows})


def _detection_fields(scored: ScoredSet) -> dict:
    tn, fp, fn, tp = (int(v) for v in confusion(scored).ravel())
    return {
        "auc": roc_auc(scored),
        "eer": eer(scored),
        "accuracy": accuracy(scored),
        "tn": tn,
        "fp": fp,
        "fn": fn,
        "tp": tp,
        "n_clips": len(scored),
    }


def evaluate_detector(
    det: BaseDetector,
    manifest: Manifest,
    specs: Sequence[AttackSpec] = (),
    detector_name: str = "detector",
    split: str = "test",
    train_datasets: Iterable[str] = (),
    defended: bool = False,
    workers: int = 1,
    on_attacked=None,
) -> list[ReportRow]:
    """Score the clean and attacked test clips of every dataset in ``manifest``.

    Attacks hit both real and fake clips so AUC and EER stay defined.

    :param on_attacked: Optional callback ``(spec, dataset_id, clean, attacked, scored)``
        receiving each attacked batch, used for figures.
    :return: One baseline row per dataset plus one row per (dataset, spec).
    :raises UndefinedMetricError: If a dataset's split holds a single class.
    """
    seen = set(train_datasets)
    rows: list[ReportRow] = []
    for dataset_id in manifest.dataset_ids:
        subset = manifest.filter(split=split, dataset_id=dataset_id)
        if not len(subset):
            logger.warning("dataset %s has no %s split; skipped", dataset_id, split)
            continue
        clips, labels = subset.load_clips()
        name = f"{dataset_id} ({split} split of {manifest.root})"
        common = {
            "detector": detector_name,
            "detector_kind": det.kind,
            "defended": defended,
            "dataset_id": dataset_id,
            "seen": dataset_id in seen,
        }
        clean = ScoredSet.from_lists(score_clips(det, clips), labels, name=name)
        clean.require_both_classes()
        rows.append(ReportRow(**common, attack=BASELINE, family="baseline", **_detection_fields(clean)))

        for spec in tqdm(specs, desc=f"Attacking {dataset_id}", leave=False):
            batch = attack_batch(det, clips, spec, labels=labels, workers=workers)
            scored = ScoredSet.from_lists(score_clips(det, batch.clips), labels, name=name)
            quality = _quality(clips, batch.clips)
            rows.append(
                ReportRow(
                    **common,
                    attack=spec.kind,
                    family=spec.family,
                    parameter=float(spec.parameter),
                    **_detection_fields(scored),
                    **quality,
                    success_rate=batch.success_rate,
                    errors=len(batch.errors),
                )
            )
            logger.info(
                "%s on %s: AUC %.3f / EER %.3f",
                spec.label(),
                dataset_id,
                rows[-1].auc,
                rows[-1].eer,
            )
            if on_attacked is not None:
                on_attacked(spec, dataset_id, clips, batch.clips, scored)
    return rows


def _quality(clean: Sequence[AudioClip], attacked: Sequence[AudioClip]) -> dict[str, float]:
    scores = [quality_scores(a, b) for a, b in zip(clean, attacked)]
    return {key: float(np.mean([s[key] for s in scores])) for key in scores[0]}


def write_loss_curve(loss_curve: Sequence[float], path: str | Path, dev_auc: Sequence[float] = ()) -> Path:
    """CSV with one row per epoch: ``epoch,loss[,dev_auc]``."""
    path = Path(path)
    lines = ["epoch,loss,dev_auc" if dev_auc else "epoch,loss"]
    for epoch, loss in enumerate(loss_curve, start=1):
        cells = [str(epoch), repr(float(loss))]
        if dev_auc:
            cells.append(repr(float(dev_auc[epoch - 1])) if epoch <= len(dev_auc) else "")
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
