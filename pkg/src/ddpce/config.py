"""Run configuration: a YAML document mapped onto dataclasses, unknown keys rejected."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .ensemble import FitSettings
from .features import DEFAULT_SPECS, FeatureSpec, feature_index
from .thermal import ThermalConstants


class ConfigError(ValueError):
    pass


@dataclass
class DataConfig:
    path: str = "dataset.csv"
    count: int = 935


@dataclass
class EnsembleConfig:
    members: int = 100
    train_sizes: list = field(default_factory=lambda: [100, 200, 300, 400, 500, 600, 700, 800])
    test_size: int = 135


@dataclass
class OptimizerConfig:
    algorithm: str = "pso"
    budget: int | None = None
    pins: dict = field(default_factory=lambda: {"T_a": 45.0, "P": 140.0})


@dataclass
class MooConfig:
    population: int = 100
    generations: int = 140
    budget: int = 20000


@dataclass
class RunConfig:
    seed: int = 0
    data: DataConfig = field(default_factory=DataConfig)
    fit: FitSettings = field(default_factory=FitSettings)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    moo: MooConfig = field(default_factory=MooConfig)
    thermal: ThermalConstants = field(default_factory=ThermalConstants)
    features: dict = field(default_factory=dict)  # name -> {lower, upper}

    @property
    def specs(self) -> tuple[FeatureSpec, ...]:
        specs = list(DEFAULT_SPECS)
        for name, bounds in self.features.items():
            j = feature_index(name)
            if not isinstance(bounds, dict) or not set(bounds) <= {"lower", "upper"}:
                raise ConfigError(f"features.{name}: only 'lower' and 'upper' may be overridden")
            specs[j] = dataclasses.replace(specs[j], **bounds)
        return tuple(specs)


def _build(cls, doc, where: str):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(doc).__name__}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(doc) - set(known))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    kwargs = {}
    for key, value in doc.items():
        default = known[key].default_factory() if known[key].default_factory is not dataclasses.MISSING else known[key].default
        if dataclasses.is_dataclass(default):
            kwargs[key] = _build(type(default), value, f"{where}.{key}")
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def validate(cfg: RunConfig) -> RunConfig:
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    need(isinstance(cfg.seed, int) and cfg.seed >= 0, "seed must be a non-negative integer")
    need(isinstance(cfg.data.count, int) and cfg.data.count >= 1, "data.count must be a positive integer")
    need(cfg.fit.solver in ("sparse-adaptive", "ols", "lar"), f"fit.solver: unknown solver {cfg.fit.solver!r}")
    need(cfg.fit.basis in ("total-degree", "hyperbolic", "tensor-product"), f"fit.basis: unknown basis {cfg.fit.basis!r}")
    need(0 < cfg.fit.q <= 1, "fit.q must lie in (0, 1]")
    need(cfg.fit.cond_threshold >= 1, "fit.cond_threshold must be >= 1")
    need(isinstance(cfg.fit.degree, int) and cfg.fit.degree >= 0, "fit.degree must be a non-negative integer")
    need(isinstance(cfg.fit.max_total_degree, int) and cfg.fit.max_total_degree >= 1,
         "fit.max_total_degree must be a positive integer")
    need(isinstance(cfg.ensemble.members, int) and cfg.ensemble.members >= 1, "ensemble.members must be >= 1")
    need(isinstance(cfg.ensemble.train_sizes, list) and cfg.ensemble.train_sizes
         and all(isinstance(m, int) and m >= 1 for m in cfg.ensemble.train_sizes),
         "ensemble.train_sizes must be a nonempty list of positive integers")
    need(len(set(cfg.ensemble.train_sizes)) == len(cfg.ensemble.train_sizes), "ensemble.train_sizes has duplicates")
    need(isinstance(cfg.ensemble.test_size, int) and cfg.ensemble.test_size >= 1, "ensemble.test_size must be >= 1")
    need(cfg.optimizer.algorithm in ("pso", "de"), f"optimizer.algorithm: unknown algorithm {cfg.optimizer.algorithm!r}")
    need(cfg.optimizer.budget is None or (isinstance(cfg.optimizer.budget, int) and cfg.optimizer.budget >= 1),
         "optimizer.budget must be a positive integer")
    need(cfg.moo.population >= 4 and cfg.moo.generations >= 0 and cfg.moo.budget >= cfg.moo.population,
         "moo: need population >= 4, generations >= 0 and budget >= population")
    try:
        specs = cfg.specs
        for name, value in cfg.optimizer.pins.items():
            s = specs[feature_index(name)]
            need(s.lower <= float(value) <= s.upper, f"optimizer.pins.{name}={value} outside [{s.lower}, {s.upper}]")
        pinned = {feature_index(k) for k in cfg.optimizer.pins}
        need({feature_index("T_a"), feature_index("P")} <= pinned, "optimizer.pins must fix T_a and P")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"features/pins: {exc}") from None
    return cfg


def load_config(path=None) -> RunConfig:
    """Read a YAML run configuration; ``None`` gives the defaults."""
    if path is None:
        return validate(RunConfig())
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        doc = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: {exc}") from None
    return validate(_build(RunConfig, doc, "config"))
