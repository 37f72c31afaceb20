"""Command-line entry point: synth, train, attack, eval, defend and report."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from collections import defaultdict
from pathlib import Path

from pydantic import ValidationError

from afbench import __version__
from afbench.attacks.specs import ATTACK_KINDS, make_spec, parse_spec, resolve_kind
from afbench.config import ExperimentConfig, Settings, load_config
from afbench.datasets.cache import AttackCache, cache_attacked
from afbench.datasets.manifest import Manifest, load_manifest
from afbench.datasets.synth import synth_corpus
from afbench.detectors.checkpoint import load_checkpoint, save_checkpoint
from afbench.detectors.factory import DETECTOR_KINDS, make_detector
from afbench.errors import AFBenchError, ConfigError
from afbench.metrics.detection import confusion
from afbench.metrics.quality import quality_scores
from afbench.models.evaluator import AVG, EvalReport, evaluate_detector, write_loss_curve
from afbench.models.trainer import AdversarialAugmenter, train
from afbench.reporting.figures import plot_confusion, plot_spectrogram_triptych, plot_sweep, slug
from afbench.reporting.tables import load_report, merge_reports, render_html, write_report

logger = logging.getLogger(__name__)

DEFAULT_OUT = Path("runs")

# CLI flag -> spec field, for the attack parameters
ATTACK_FLAGS = {
    "semitones": int,
    "kernel": int,
    "sigma": float,
    "bits": int,
    "eps": float,
    "steps": int,
    "alpha": float,
    "c": float,
    "k": float,
    "iters": int,
    "attack_lr": float,
    "overshoot": float,
    "max_iters": int,
}
FIELD_NAMES = {"eps": "epsilon", "attack_lr": "lr"}
QUALITY_COLUMNS = [
    "clip_id",
    "label",
    "split",
    "dataset_id",
    "attack",
    "parameter",
    "attacked_path",
    "waveform_mse",
    "spectrogram_mse",
    "ssim",
]


def positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return number


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file mirroring ExperimentConfig")
    common.add_argument("--seed", type=int, help="Global seed (default: AFBENCH_SEED or 0)")
    common.add_argument("--workers", type=positive_int, help="Worker threads for per-clip work")
    common.add_argument("--out", type=Path, help="Output directory")
    common.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: AFBENCH_LOG_LEVEL or INFO)",
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="afbench", description="Anti-forensic attacks against audio deepfake detectors"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="Write the synthetic desk corpus")
    p.add_argument("--n", type=positive_int, help="Clips per class")
    p.add_argument("--duration", type=float, help="Clip duration in seconds")
    p.add_argument("--artifact", choices=["spectral_notch", "hf_hiss", "phase_jitter"])
    p.add_argument("--dataset-id", help="Dataset id written to the manifest")

    p = sub.add_parser("train", parents=[common], help="Train a reference detector")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--kind", choices=DETECTOR_KINDS, default="raw")
    p.add_argument("--epochs", type=positive_int)
    p.add_argument("--batch-size", type=positive_int)
    p.add_argument("--lr", type=float, help="Learning rate")
    p.add_argument("--weight-decay", type=float)
    p.add_argument("--checkpoint", type=Path, help="Output checkpoint (default: OUT/<kind>.json)")

    p = sub.add_parser("attack", parents=[common], help="Attack a manifest and cache the audio")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--kind", required=True, help=f"One of: {', '.join(ATTACK_KINDS)}")
    p.add_argument("--checkpoint", type=Path, help="Detector, required for optimization attacks")
    p.add_argument("--split", choices=["train", "dev", "test"], help="Only this split")
    for flag, kind in ATTACK_FLAGS.items():
        p.add_argument(f"--{flag.replace('_', '-')}", dest=flag, type=kind)

    p = sub.add_parser("eval", parents=[common], help="Evaluate detectors under attacks")
    p.add_argument("--checkpoint", type=Path, nargs="+", required=True)
    p.add_argument("--manifest", type=Path, nargs="+", required=True)
    p.add_argument(
        "--attack",
        action="append",
        default=[],
        help="Attack kind to sweep over its configured grid (repeatable; 'all' for every kind)",
    )
    p.add_argument("--split", default="test", choices=["train", "dev", "test"])
    p.add_argument("--no-figures", action="store_true", help="Skip PNG output")

    p = sub.add_parser("defend", parents=[common], help="Adversarially train a detector")
    p.add_argument("--checkpoint", type=Path, required=True, help="Architecture and seed source")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--kinds", nargs="*", help="Attack kinds used for augmentation (default: all)")
    p.add_argument("--fraction", type=float, default=0.5, help="Share of each batch replaced")
    p.add_argument("--epochs", type=positive_int)

    p = sub.add_parser("report", parents=[common], help="Merge JSON reports into a summary")
    p.add_argument("reports", type=Path, nargs="+")
    return parser


def resolve_settings(args: argparse.Namespace) -> tuple[ExperimentConfig, Settings]:
    """Flags override the config file, which overrides ``AFBENCH_*`` settings."""
    config = load_config(args.config)
    settings = Settings()
    seed = next(s for s in (args.seed, config.seed, settings.seed) if s is not None)
    workers = args.workers or config.workers or settings.workers
    out = args.out or config.out or settings.out
    return config, Settings(seed=seed, workers=workers, out=out, log_level=settings.log_level)


def _out_dir(settings: Settings) -> Path:
    out = settings.out or DEFAULT_OUT
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(args: argparse.Namespace, config: ExperimentConfig, settings: Settings) -> Path:
    if settings.out is None:
        raise ConfigError("synth requires --out")
    updates = {"rng_seed": settings.seed}
    if args.n is not None:
        updates["n_per_class"] = args.n
    if args.duration is not None:
        updates["duration"] = args.duration
    if args.artifact is not None:
        updates["artifact_kind"] = args.artifact
    if args.dataset_id is not None:
        updates["dataset_id"] = args.dataset_id
    spec = config.synth.model_validate({**config.synth.model_dump(), **updates})
    synth_corpus(spec, settings.out)
    path = settings.out / "manifest.csv"
    print(path)
    return path


def cmd_train(args: argparse.Namespace, config: ExperimentConfig, settings: Settings) -> Path:
    manifest = load_manifest(args.manifest)
    updates = {"rng_seed": settings.seed}
    for flag, name in (
        ("epochs", "epochs"),
        ("batch_size", "batch_size"),
        ("lr", "learning_rate"),
        ("weight_decay", "weight_decay"),
    ):
        if getattr(args, flag) is not None:
            updates[name] = getattr(args, flag)
    cfg = config.train.model_validate({**config.train.model_dump(), **updates})
    det = make_detector(args.kind, seed=settings.seed)
    result = train(det, manifest, cfg)

    out = _out_dir(settings)
    path = args.checkpoint or out / f"{args.kind}.json"
    train_datasets = sorted({e.dataset_id for e in manifest.split("train")})
    save_checkpoint(det, path, seed=settings.seed, train_datasets=train_datasets)
    write_loss_curve(result.loss_curve, path.with_name(f"{path.stem}_loss.csv"), result.dev_auc)
    logger.info("Final training loss %.4f", result.loss_curve[-1])
    print(path)
    return path


def _attack_specs(args: argparse.Namespace, config: ExperimentConfig) -> list:
    kind = resolve_kind(args.kind)
    given = {
        FIELD_NAMES.get(flag, flag): getattr(args, flag)
        for flag in ATTACK_FLAGS
        if getattr(args, flag) is not None
    }
    grid_specs = config.specs(kind)
    swept = grid_specs[0].param_name
    options = {k: v for k, v in given.items() if k != swept}
    if swept in given:
        base = grid_specs[0].model_dump(exclude={"kind", "family", "param_name", swept})
        return [make_spec(kind, given[swept], **{**base, **options})]
    return [parse_spec({**spec.model_dump(), **options}) for spec in grid_specs]


def cmd_attack(args: argparse.Namespace, config: ExperimentConfig, settings: Settings) -> list[Path]:
    specs = _attack_specs(args, config)
    manifest = load_manifest(args.manifest)
    if args.split:
        manifest = manifest.filter(split=args.split)
    det = None
    if args.checkpoint is not None:
        det, _ = load_checkpoint(args.checkpoint)
    elif specs[0].family == "optimization":
        raise ConfigError(f"{specs[0].kind} needs --checkpoint")

    out = _out_dir(settings)
    cache = AttackCache(out / "cache")
    written = []
    for spec in specs:
        attacked = cache_attacked(
            manifest, spec, cache.root, det=det, workers=settings.workers, cache=cache
        )
        quality_path = out / f"quality_{slug(spec.kind, f'{spec.parameter:g}')}.csv"
        with quality_path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(QUALITY_COLUMNS)
            for source, entry in zip(manifest, attacked):
                scores = quality_scores(manifest.load_clip(source), attacked.load_clip(entry))
                writer.writerow(
                    [
                        source.clip_id,
                        source.label,
                        source.split,
                        source.dataset_id,
                        spec.kind,
                        repr(float(spec.parameter)),
                        str(attacked.resolve(entry)),
                        *(repr(scores[name]) for name in QUALITY_COLUMNS[-3:]),
                    ]
                )
        manifest_path = attacked.root / f"{spec.key()[:16]}.csv"
        logger.info("%s: attacked manifest %s, quality %s", spec.label(), manifest_path, quality_path)
        print(manifest_path)
        written.append(manifest_path)
    logger.info("cache hits %d, misses %d", cache.hits, cache.misses)
    return written


def _eval_specs(args: argparse.Namespace, config: ExperimentConfig) -> list:
    if "all" in args.attack:
        return config.all_specs()
    return [spec for kind in args.attack for spec in config.specs(kind)]


def _write_figures(report: EvalReport, captured: dict, figures_dir: Path) -> None:
    for (detector, spec_label), (matrix, title) in captured["confusion"].items():
        plot_confusion(matrix, title, figures_dir / f"confusion_{slug(detector, spec_label)}.png")
    for (detector, spec_label, dataset_id), (clean, attacked) in captured["triptych"].items():
        plot_spectrogram_triptych(
            clean,
            attacked,
            f"{detector}: {spec_label} on {dataset_id}",
            figures_dir / f"spectrogram_{slug(detector, spec_label, dataset_id)}.png",
        )
    sweeps = defaultdict(list)
    for row in [*report.rows, *report.averages]:
        if row.family != "baseline" and row.parameter is not None and not row.detector.endswith(" avg"):
            sweeps[(row.detector, row.attack)].append(row)
    for (detector, attack), rows in sweeps.items():
        if len({r.parameter for r in rows}) > 1:
            plot_sweep(rows, f"{detector}: {attack}", figures_dir / f"sweep_{slug(detector, attack)}.png")


def cmd_eval(args: argparse.Namespace, config: ExperimentConfig, settings: Settings) -> dict[str, Path]:
    specs = _eval_specs(args, config)
    manifests: list[Manifest] = [load_manifest(path) for path in args.manifest]
    captured = {"confusion": {}, "triptych": {}}
    rows = []
    for checkpoint in args.checkpoint:
        det, meta = load_checkpoint(checkpoint)
        name = checkpoint.stem

        def capture(spec, dataset_id, clean, attacked, scored, name=name):
            key = (name, spec.label())
            matrix = confusion(scored)
            if key in captured["confusion"]:
                matrix = matrix + captured["confusion"][key][0]
            captured["confusion"][key] = (matrix, f"{name}: {spec.label()}")
            captured["triptych"].setdefault((name, spec.label(), dataset_id), (clean[0], attacked[0]))

        for manifest in manifests:
            rows += evaluate_detector(
                det,
                manifest,
                specs,
                detector_name=name,
                split=args.split,
                train_datasets=meta["train_datasets"],
                defended=meta["defended"],
                workers=settings.workers,
                on_attacked=capture,
            )
    report = EvalReport.from_rows(rows)
    out = _out_dir(settings)
    paths = write_report(report, out)
    meta_path = out / "report.meta.json"
    meta_path.write_text(
        json.dumps(
            {
                "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
                "afbench_version": __version__,
                "checkpoints": [str(p) for p in args.checkpoint],
                "manifests": [str(p) for p in args.manifest],
                "seed": settings.seed,
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    if not args.no_figures:
        _write_figures(report, captured, out / "figures")
    for row in report.averages:
        if row.dataset_id == AVG and row.attack == "none":
            logger.info("%s clean: AUC %.3f / EER %.3f", row.detector, row.auc, row.eer)
    print(paths["json"])
    return paths


def cmd_defend(args: argparse.Namespace, config: ExperimentConfig, settings: Settings) -> Path:
    source, meta = load_checkpoint(args.checkpoint)
    manifest = load_manifest(args.manifest)
    kinds = config.defense_kinds if args.kinds is None else args.kinds
    updates = {"rng_seed": settings.seed}
    if args.epochs is not None:
        updates["epochs"] = args.epochs
    cfg = config.train.model_validate({**config.train.model_dump(), **updates})
    det = make_detector(meta["kind"], **{**source.architecture(), "seed": settings.seed})
    grids = {resolve_kind(k): v for k, v in config.attacks.items()}
    augmenter = AdversarialAugmenter(kinds, fraction=args.fraction, seed=settings.seed, grids=grids)
    result = train(det, manifest, cfg, augmenter=augmenter)
    if augmenter.failures:
        logger.warning("%d augmentation attacks failed and kept clean clips", augmenter.failures)

    out = _out_dir(settings)
    path = out / f"{args.checkpoint.stem}_defended.json"
    train_datasets = sorted({e.dataset_id for e in manifest.split("train")})
    save_checkpoint(
        det,
        path,
        seed=settings.seed,
        train_datasets=train_datasets,
        defended=augmenter.enabled,
    )
    write_loss_curve(result.loss_curve, path.with_name(f"{path.stem}_loss.csv"), result.dev_auc)
    print(path)
    return path


def cmd_report(args: argparse.Namespace, config: ExperimentConfig, settings: Settings) -> dict[str, Path]:
    report = merge_reports([load_report(path) for path in args.reports])
    out = _out_dir(settings)
    paths = write_report(report, out, stem="summary")
    paths["html"] = out / "summary.html"
    paths["html"].write_text(render_html(report), encoding="utf-8")
    print(paths["md"])
    return paths


COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "attack": cmd_attack,
    "eval": cmd_eval,
    "defend": cmd_defend,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config, settings = resolve_settings(args)
        level = args.log_level or settings.log_level
        logging.basicConfig(
            level=getattr(logging, level.upper(), logging.INFO),
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
        COMMANDS[args.command](args, config, settings)
    except AFBenchError as e:
        logger.error("%s", e)
        print(f"afbench {args.command}: {e}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        print(f"afbench {args.command}: {e}", file=sys.stderr)
        return ConfigError.exit_code
    except OSError as e:
        print(f"afbench {args.command}: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
