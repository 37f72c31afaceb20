from afbench.attacks.batch import AttackBatchResult, attack_batch, attack_clip
from afbench.attacks.optimization import (
    apply_optimization,
    cw,
    deepfool,
    fgsm,
    pgd,
    run_cw,
    run_deepfool,
)
from afbench.attacks.specs import (
    ATTACK_KINDS,
    OPTIMIZATION_KINDS,
    DEFAULT_GRIDS,
    QUALITY_PARAMS,
    STATISTICAL_KINDS,
    AttackSpec,
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

__all__ = [
    "ATTACK_KINDS",
    "OPTIMIZATION_KINDS",
    "DEFAULT_GRIDS",
    "QUALITY_PARAMS",
    "STATISTICAL_KINDS",
    "AttackBatchResult",
    "AttackSpec",
    "apply_optimization",
    "apply_statistical",
    "attack_batch",
    "attack_clip",
    "cw",
    "deepfool",
    "fgsm",
    "iter_grid",
    "make_spec",
    "median_filter",
    "noise_add",
    "parse_spec",
    "pgd",
    "pitch_shift",
    "quantize",
    "resolve_kind",
    "run_cw",
    "run_deepfool",
]
