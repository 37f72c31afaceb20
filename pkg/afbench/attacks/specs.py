"""Typed attack specifications and their default parameter grids."""

from __future__ import annotations

import hashlib
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, field_validator

from afbench.errors import ConfigError

__all__ = [
    "ATTACK_KINDS",
    "KIND_ALIASES",
    "OPTIMIZATION_KINDS",
    "DEFAULT_GRIDS",
    "QUALITY_PARAMS",
    "STATISTICAL_KINDS",
    "AttackSpec",
    "CwSpec",
    "DeepFoolSpec",
    "FgsmSpec",
    "MedianFilterSpec",
    "NoiseSpec",
    "OptAttackSpec",
    "PgdSpec",
    "PitchShiftSpec",
    "QuantizeSpec",
    "StatAttackSpec",
    "derive_seed",
    "iter_grid",
    "make_spec",
    "parse_spec",
    "resolve_kind",
]


class _AttackSpecBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    family: Literal["statistical", "optimization"]
    param_name: str

    @property
    def parameter(self) -> float:
        """Value of the swept parameter, used as the report's parameter column."""
        return getattr(self, self.param_name)

    def key(self) -> str:
        """Stable digest of the canonical JSON form."""
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()

    def label(self) -> str:
        return f"{self.kind}({self.param_name}={self.parameter:g})"


class PitchShiftSpec(_AttackSpecBase):
    """Phase-vocoder stretch followed by resampling, by ``semitones``."""

    kind: Literal["pitch_shift"] = "pitch_shift"
    family: Literal["statistical"] = "statistical"
    param_name: Literal["semitones"] = "semitones"
    semitones: int = Field(ge=-24, le=24)


class MedianFilterSpec(_AttackSpecBase):
    kind: Literal["median_filter"] = "median_filter"
    family: Literal["statistical"] = "statistical"
    param_name: Literal["kernel"] = "kernel"
    kernel: int

    @field_validator("kernel")
    @classmethod
    def _odd_kernel(cls, value: int) -> int:
        if value < 3 or value % 2 == 0:
            raise ValueError(f"median kernel must be odd and >= 3, got {value}")
        return value


class NoiseSpec(_AttackSpecBase):
    kind: Literal["noise_add"] = "noise_add"
    family: Literal["statistical"] = "statistical"
    param_name: Literal["sigma"] = "sigma"
    sigma: float = Field(ge=0)
    seed: int = 0


class QuantizeSpec(_AttackSpecBase):
    kind: Literal["quantize"] = "quantize"
    family: Literal["statistical"] = "statistical"
    param_name: Literal["bits"] = "bits"
    bits: int = Field(ge=2)


class FgsmSpec(_AttackSpecBase):
    kind: Literal["fgsm"] = "fgsm"
    family: Literal["optimization"] = "optimization"
    param_name: Literal["epsilon"] = "epsilon"
    epsilon: float = Field(ge=0)


class PgdSpec(_AttackSpecBase):
    """L-infinity PGD; ``alpha`` defaults to ``2.5 * epsilon / steps``."""

    kind: Literal["pgd"] = "pgd"
    family: Literal["optimization"] = "optimization"
    param_name: Literal["epsilon"] = "epsilon"
    epsilon: float = Field(ge=0)
    steps: int = Field(default=20, ge=1)
    alpha: float | None = Field(default=None, ge=0)
    seed: int = 0

    @property
    def step_size(self) -> float:
        return self.alpha if self.alpha is not None else 2.5 * self.epsilon / self.steps


class CwSpec(_AttackSpecBase):
    kind: Literal["cw"] = "cw"
    family: Literal["optimization"] = "optimization"
    param_name: Literal["c"] = "c"
    c: float = Field(ge=0)
    k: float = Field(default=0.0, ge=0)
    iters: int = Field(default=100, ge=1)
    lr: float = Field(default=0.005, gt=0)


class DeepFoolSpec(_AttackSpecBase):
    kind: Literal["deepfool"] = "deepfool"
    family: Literal["optimization"] = "optimization"
    param_name: Literal["overshoot"] = "overshoot"
    overshoot: float = Field(default=0.02, ge=0)
    max_iters: int = Field(default=50, ge=1)


StatAttackSpec = Annotated[
    Union[PitchShiftSpec, MedianFilterSpec, NoiseSpec, QuantizeSpec],
    Field(discriminator="kind"),
]
OptAttackSpec = Annotated[
    Union[FgsmSpec, PgdSpec, CwSpec, DeepFoolSpec],
    Field(discriminator="kind"),
]
AttackSpec = Annotated[
    Union[
        PitchShiftSpec,
        MedianFilterSpec,
        NoiseSpec,
        QuantizeSpec,
        FgsmSpec,
        PgdSpec,
        CwSpec,
        DeepFoolSpec,
    ],
    Field(discriminator="kind"),
]

_SPEC_ADAPTER: TypeAdapter = TypeAdapter(AttackSpec)

STATISTICAL_KINDS = ("pitch_shift", "median_filter", "noise_add", "quantize")
OPTIMIZATION_KINDS = ("fgsm", "pgd", "cw", "deepfool")
ATTACK_KINDS = STATISTICAL_KINDS + OPTIMIZATION_KINDS

KIND_ALIASES = {
    "pitch": "pitch_shift",
    "median": "median_filter",
    "filter": "median_filter",
    "noise": "noise_add",
    "quant": "quantize",
}

# Default grids in listing order; the FGSM list is not sorted.
DEFAULT_GRIDS: dict[str, tuple[float, ...]] = {
    "pitch_shift": (1, -1, 5, -5, 12, -12),
    "median_filter": (3, 5, 7, 9),
    "noise_add": (0.001, 0.01, 0.02, 0.03, 0.04, 0.05),
    "quantize": (4, 6, 8),
    "fgsm": (0.001, 0.05, 0.01, 0.1, 0.2),
    "pgd": (0.003, 0.007, 0.015, 0.03, 0.06),
    "cw": (0, 10, 25, 35, 50),
    "deepfool": (0.005, 0.01, 0.02, 0.03, 0.05),
}

# Settings used for the perceptibility comparison.
QUALITY_PARAMS: dict[str, float] = {
    "pitch_shift": -1,
    "median_filter": 3,
    "noise_add": 0.001,
    "quantize": 4,
    "fgsm": 0.001,
    "pgd": 0.003,
    "cw": 10,
    "deepfool": 0.005,
}

_PARAM_NAMES = {
    "pitch_shift": "semitones",
    "median_filter": "kernel",
    "noise_add": "sigma",
    "quantize": "bits",
    "fgsm": "epsilon",
    "pgd": "epsilon",
    "cw": "c",
    "deepfool": "overshoot",
}
_INTEGER_PARAMS = {"semitones", "kernel", "bits"}


def resolve_kind(name: str) -> str:
    """Map a kind name or short alias to its canonical attack kind."""
    kind = KIND_ALIASES.get(name, name)
    if kind not in ATTACK_KINDS:
        raise ConfigError(f"unknown attack {name!r}; choose one of: {', '.join(ATTACK_KINDS)}")
    return kind


def parse_spec(data: dict) -> AttackSpec:
    """Validate a mapping into the matching attack spec."""
    try:
        return _SPEC_ADAPTER.validate_python(data)
    except ValidationError as e:
        raise ConfigError(f"invalid attack spec {data}: {e}") from e


def make_spec(kind: str, value: float, **overrides) -> AttackSpec:
    """Build the spec of ``kind`` with its swept parameter set to ``value``."""
    kind = resolve_kind(kind)
    name = _PARAM_NAMES[kind]
    value = int(value) if name in _INTEGER_PARAMS else float(value)
    return parse_spec({"kind": kind, name: value, **overrides})


def iter_grid(kind: str, grid: tuple[float, ...] | None = None, **overrides) -> list[AttackSpec]:
    """Specs for every grid value of ``kind``, sorted by parameter value."""
    kind = resolve_kind(kind)
    values = DEFAULT_GRIDS[kind] if grid is None else grid
    return [make_spec(kind, value, **overrides) for value in sorted(values)]


def derive_seed(base_seed: int, clip_id: str) -> int:
    """Per-clip 64-bit seed from a base seed and a clip id."""
    digest = hashlib.sha256(f"{base_seed}:{clip_id}".encode()).digest()
    return int.from_bytes(digest[:8], "little")
