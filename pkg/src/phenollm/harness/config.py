"""Experiment grid configuration, stored as a single JSON file."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..dataset import Target
from ..llmgate import BackendConfig
from ..prompts import Strategy
from ..schema import DEFAULT_WINDOW_LENGTH
from ..tables import DataFormat


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_path: str
    output_dir: str
    strategies: tuple[Strategy, ...] = (Strategy.COT,)
    formats: tuple[DataFormat, ...] = (DataFormat.MARKDOWN,)
    backends: tuple[BackendConfig, ...] = (BackendConfig(),)
    target: Target = Target.DEPRESSION
    seed: int = 0
    per_year: int = 30
    window_length: int = DEFAULT_WINDOW_LENGTH
    repetitions: int = 1
    max_samples: int | None = None
    cache_dir: str | None = None  # defaults to <output_dir>/cache
    replay_only: bool = False

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "strategies", tuple(Strategy(s) for s in self.strategies))
        set_(self, "formats", tuple(DataFormat(f) for f in self.formats))
        set_(self, "backends", tuple(
            b if isinstance(b, BackendConfig) else BackendConfig.from_dict(b) for b in self.backends
        ))
        set_(self, "target", Target(self.target))
        if not self.strategies or not self.formats or not self.backends:
            raise ConfigError("the strategy x format x backend grid is empty")
        models = [b.model_name for b in self.backends]
        if len(set(models)) != len(models):
            raise ConfigError(f"backend model names must be unique: {models}")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")

    @property
    def cache_path(self) -> Path:
        return Path(self.cache_dir) if self.cache_dir else Path(self.output_dir) / "cache"

    @property
    def records_path(self) -> Path:
        return Path(self.output_dir) / "records.jsonl"

    def to_dict(self) -> dict:
        return {
            "dataset_path": self.dataset_path,
            "output_dir": self.output_dir,
            "strategies": [s.value for s in self.strategies],
            "formats": [f.value for f in self.formats],
            "backends": [b.to_dict() for b in self.backends],
            "target": self.target.value,
            "seed": self.seed,
            "per_year": self.per_year,
            "window_length": self.window_length,
            "repetitions": self.repetitions,
            "max_samples": self.max_samples,
            "cache_dir": self.cache_dir,
            "replay_only": self.replay_only,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
