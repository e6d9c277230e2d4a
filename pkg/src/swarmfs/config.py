"""Run configuration: a YAML document mirrored by ``RunConfig``.

Relative paths inside the file are resolved against the file's directory.
Unknown keys are rejected so typos fail loudly instead of silently falling
back to defaults.
"""
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from swarmfs.classifiers import ModelSpec
from swarmfs.errors import ConfigError
from swarmfs.pso import SwarmConfig

EVAL_MODE_ALIASES = {"paper": "paper_faithful_test_set", "validation": "validation_split"}


@dataclass(frozen=True)
class DatasetConfig:
    path: Path
    label_column: str = "diagnosis"
    positive_label: str = "M"
    drop_columns: tuple = ()


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetConfig
    models: tuple
    swarm: SwarmConfig = field(default_factory=SwarmConfig)
    seed: int = 42
    seed_sweep: int = 1
    preprocess_mode: str = "paper"
    test_fraction: float = 0.2
    cv_folds: int = 10
    cv_top: int = 5
    averaging: str = "weighted"
    background_size: int = 100
    explain_method: str = "exact"
    n_coalitions: int = 2048
    output: Path = Path("runs/default")

    @property
    def seeds(self):
        """PSO seeds: the master seed followed by its ``seed_sweep - 1`` successors."""
        return [self.seed + i for i in range(self.seed_sweep)]

    def with_overrides(self, seed=None, out=None, eval_mode=None):
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=_u64(seed, "seed"))
        if out is not None:
            cfg = replace(cfg, output=Path(out))
        if eval_mode is not None:
            mode = EVAL_MODE_ALIASES.get(eval_mode, eval_mode)
            cfg = replace(cfg, swarm=_swarm({**cfg.swarm.to_dict(), "fitness_eval_mode": mode}))
        return cfg

    def to_dict(self):
        """Echo for the report; paths are shown as written so the echo is location independent."""
        return {
            "dataset": {
                "path": self.dataset.path.name,
                "label_column": self.dataset.label_column,
                "positive_label": self.dataset.positive_label,
                "drop_columns": list(self.dataset.drop_columns),
            },
            "models": [m.to_dict() for m in self.models],
            "swarm": {k: v for k, v in self.swarm.to_dict().items() if k != "seed"},
            "seed": self.seed,
            "seeds": self.seeds,
            "preprocess_mode": self.preprocess_mode,
            "test_fraction": self.test_fraction,
            "cv_folds": self.cv_folds,
            "cv_top": self.cv_top,
            "averaging": self.averaging,
            "background_size": self.background_size,
            "explain_method": self.explain_method,
            "n_coalitions": self.n_coalitions,
        }


_TOP_KEYS = {"dataset", "models", "swarm", "seed", "seed_sweep", "preprocess", "crossval", "explain",
             "averaging", "output"}


def _u64(v, name):
    if isinstance(v, bool) or not isinstance(v, int):
        try:
            v = int(str(v), 10)
        except ValueError:
            raise ConfigError(f"{name} must be an integer, got {v!r}") from None
    if not 0 <= v < 2**64:
        raise ConfigError(f"{name} must be an unsigned 64-bit integer, got {v}")
    return v


def _section(doc, key, allowed):
    sec = doc.get(key) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{key!r} must be a mapping")
    unknown = sorted(set(sec) - set(allowed))
    if unknown:
        raise ConfigError(f"{key}: unknown keys {unknown}; allowed: {sorted(allowed)}")
    return sec


def _swarm(values):
    allowed = {f.name for f in fields(SwarmConfig)}
    unknown = sorted(set(values) - allowed)
    if unknown:
        raise ConfigError(f"swarm: unknown keys {unknown}; allowed: {sorted(allowed)}")
    if "fitness_eval_mode" in values:
        values = {**values, "fitness_eval_mode": EVAL_MODE_ALIASES.get(values["fitness_eval_mode"],
                                                                       values["fitness_eval_mode"])}
    try:
        return SwarmConfig(**values)
    except TypeError as exc:
        raise ConfigError(f"swarm: {exc}") from None


def _model(entry, i):
    if isinstance(entry, str):
        entry = {"family": entry}
    if not isinstance(entry, dict) or "family" not in entry:
        raise ConfigError(f"models[{i}] must be a family name or a mapping with a 'family' key")
    unknown = sorted(set(entry) - {"family", "hyperparameters"})
    if unknown:
        raise ConfigError(f"models[{i}]: unknown keys {unknown}")
    return ModelSpec(str(entry["family"]), dict(entry.get("hyperparameters") or {}))


def parse(doc, base_dir=Path(".")):
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a mapping")
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown top-level keys {unknown}; allowed: {sorted(_TOP_KEYS)}")
    ds = _section(doc, "dataset", {"path", "label_column", "positive_label", "drop_columns"})
    if "path" not in ds:
        raise ConfigError("dataset.path is required")
    dataset = DatasetConfig(
        path=(base_dir / str(ds["path"])).resolve(),
        label_column=str(ds.get("label_column", "diagnosis")),
        positive_label=str(ds.get("positive_label", "M")),
        drop_columns=tuple(str(c) for c in ds.get("drop_columns") or ()),
    )
    models = doc.get("models")
    if not models or not isinstance(models, list):
        raise ConfigError("at least one model must be listed under 'models'")
    specs = tuple(_model(m, i) for i, m in enumerate(models))
    names = [s.family for s in specs]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate model families in 'models': {sorted({n for n in names if names.count(n) > 1})}")
    if "seed" not in doc:
        raise ConfigError("a master 'seed' is required")
    pre = _section(doc, "preprocess", {"mode", "test_fraction"})
    cv = _section(doc, "crossval", {"k", "top"})
    ex = _section(doc, "explain", {"background", "method", "n_coalitions"})
    cfg = RunConfig(
        dataset=dataset,
        models=specs,
        swarm=_swarm(dict(doc.get("swarm") or {})),
        seed=_u64(doc["seed"], "seed"),
        seed_sweep=int(doc.get("seed_sweep", 1)),
        preprocess_mode=str(pre.get("mode", "paper")),
        test_fraction=float(pre.get("test_fraction", 0.2)),
        cv_folds=int(cv.get("k", 10)),
        cv_top=int(cv.get("top", 5)),
        averaging=str(doc.get("averaging", "weighted")),
        background_size=int(ex.get("background", 100)),
        explain_method=str(ex.get("method", "exact")),
        n_coalitions=int(ex.get("n_coalitions", 2048)),
        output=(base_dir / str(doc.get("output", "runs/default"))).resolve(),
    )
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg.seed_sweep < 1:
        raise ConfigError("seed_sweep must be at least 1")
    if cfg.preprocess_mode not in ("paper", "train_only"):
        raise ConfigError(f"preprocess.mode must be 'paper' or 'train_only', got {cfg.preprocess_mode!r}")
    if not 0.0 < cfg.test_fraction < 1.0:
        raise ConfigError("preprocess.test_fraction must lie in (0, 1)")
    if cfg.cv_folds < 2:
        raise ConfigError("crossval.k must be at least 2")
    if cfg.cv_top < 1:
        raise ConfigError("crossval.top must be at least 1")
    if cfg.averaging not in ("weighted", "positive_class"):
        raise ConfigError("averaging must be 'weighted' or 'positive_class'")
    if cfg.explain_method not in ("exact", "kernel"):
        raise ConfigError("explain.method must be 'exact' or 'kernel'")
    if cfg.background_size < 1:
        raise ConfigError("explain.background must be at least 1")


def load(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: configuration file not found")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    return parse(doc, path.parent)
