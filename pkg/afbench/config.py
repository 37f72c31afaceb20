"""Process settings and the experiment configuration file."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from afbench.attacks.specs import ATTACK_KINDS, DEFAULT_GRIDS, AttackSpec, iter_grid, resolve_kind
from afbench.datasets.synth import SynthSpec
from afbench.errors import ConfigError
from afbench.models.trainer import TrainConfig

__all__ = ["ExperimentConfig", "Settings", "load_config"]


class Settings(BaseSettings):
    """Process-wide defaults.

    Values are read from ``AFBENCH_*`` environment variables and are overridden by
    the corresponding command-line flags.
    """

    model_config = SettingsConfigDict(env_prefix="AFBENCH_")

    seed: int = 0
    workers: int = 1
    out: Path | None = None
    log_level: str = "INFO"


class ExperimentConfig(BaseModel):
    """Everything a full run needs: detectors, schedule, attack grids, datasets, defense."""

    model_config = ConfigDict(extra="forbid")

    detectors: list[Literal["raw", "spectrogram"]] = ["raw", "spectrogram"]
    train: TrainConfig = TrainConfig()
    synth: SynthSpec = SynthSpec()
    attacks: dict[str, list[float]] = Field(
        default_factory=lambda: {kind: list(grid) for kind, grid in DEFAULT_GRIDS.items()}
    )
    attack_options: dict[str, dict[str, float | int]] = Field(default_factory=dict)
    manifests: dict[str, Path] = Field(default_factory=dict)
    defense: bool = False
    defense_kinds: list[str] = Field(default_factory=lambda: list(ATTACK_KINDS))
    out: Path | None = None
    seed: int | None = None
    workers: int | None = None

    @field_validator("attacks")
    @classmethod
    def _known_grids(cls, value: dict[str, list[float]]) -> dict[str, list[float]]:
        grids = {}
        for name, grid in value.items():
            if not grid:
                raise ValueError(f"attack grid for {name!r} is empty")
            grids[resolve_kind(name)] = grid
        return grids

    @field_validator("attack_options", "defense_kinds")
    @classmethod
    def _known_kinds(cls, value):
        keys = value if isinstance(value, list) else list(value)
        for name in keys:
            resolve_kind(name)
        return value

    @field_validator("manifests")
    @classmethod
    def _manifests_exist(cls, value: dict[str, Path]) -> dict[str, Path]:
        for dataset_id, path in value.items():
            if not Path(path).is_file():
                raise ValueError(f"manifest for {dataset_id!r} not found: {path}")
        return value

    def specs(self, kind: str) -> list[AttackSpec]:
        """Specs for the configured grid of ``kind``, sorted by parameter."""
        kind = resolve_kind(kind)
        grid = self.attacks.get(kind, DEFAULT_GRIDS[kind])
        options = {resolve_kind(k): v for k, v in self.attack_options.items()}.get(kind, {})
        return iter_grid(kind, tuple(grid), **options)

    def all_specs(self) -> list[AttackSpec]:
        return [spec for kind in ATTACK_KINDS if kind in self.attacks for spec in self.specs(kind)]


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Read a JSON experiment config; ``None`` gives the defaults.

    :raises ConfigError: If the file is missing, not JSON, or fails validation.
    """
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        return ExperimentConfig.model_validate(data)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from e
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e
