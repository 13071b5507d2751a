"""Experiment configuration and its flat text format.

Grammar (line-oriented, UTF-8):

    # comment                 full-line comments and blank lines ignored
    [section]                 plain section header
    [section "label"]         labelled section (datasets and models)
    key = value               entry inside the current section

Sections: one optional ``[task]``, one optional ``[run]``, one or more
``[dataset "name"]`` and ``[model "name"]``. Values are scalars; lists
are comma-separated. Unknown keys are rejected.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from ..models.config import (
    Attention,
    Decomposition,
    Family,
    Head,
    LossKind,
    ModelConfig,
    ModelSize,
    PosEncoding,
    Scaler,
    Tokenization,
    TrainConfig,
)
from ..series import ForecastTask

__all__ = ["DatasetSpec", "ModelSpec", "ExperimentConfig", "parse_config", "load_config"]

_SECTION_RE = re.compile(r'^\[(\w+)(?:\s+"([^"]+)")?\]$')

DATASET_KINDS = ("sinusoid", "trend1", "trend2", "csv")


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    kind: str
    path: str | None = None
    n_series: int = 100
    seed: int = 1
    length: int = 1200
    limit_series: int = 0  # 0 = use all
    k: int = 2

    def __post_init__(self):
        if self.kind not in DATASET_KINDS:
            raise ConfigError(f"dataset {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "csv" and not self.path:
            raise ConfigError(f"dataset {self.name!r}: csv kind needs a path")
        if self.k < 1:
            raise ConfigError(f"dataset {self.name!r}: k must be >= 1")


@dataclass(frozen=True)
class ModelSpec:
    """A named model: a family plus overrides for the architecture axes."""

    name: str
    family: Family
    overrides: dict = field(default_factory=dict)

    def materialize(self, task: ForecastTask) -> ModelConfig:
        kwargs = dict(self.overrides)
        kwargs.setdefault("context_len", task.context_len)
        return ModelConfig(family=self.family, horizon=task.horizon, **kwargs)


@dataclass(frozen=True)
class ExperimentConfig:
    task: ForecastTask
    datasets: list[DatasetSpec]
    models: list[ModelSpec]
    seeds: tuple[int, ...] = (1, 5, 10)
    stride: int = 1
    split_point: int | None = None  # None: per-series length - horizon
    train: TrainConfig = field(default_factory=TrainConfig)
    out_dir: str = "results"

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if not self.datasets or not self.models:
            raise ConfigError("need at least one dataset and one model")
        names = [d.name for d in self.datasets] + [m.name for m in self.models]
        if len(set(names)) != len(names):
            raise ConfigError("dataset/model names must be unique")


_MODEL_ENUM_KEYS = {
    "tokenization": Tokenization,
    "attention": Attention,
    "head": Head,
    "pos_encoding": PosEncoding,
    "loss": LossKind,
    "scaler": Scaler,
    "decomposition": Decomposition,
    "size": ModelSize,
}
_MODEL_INT_KEYS = (
    "context_len", "patch_len", "patch_stride", "ar_order",
    "mlp_hidden", "mlp_depth", "nbeats_blocks", "nbeats_hidden", "nbeats_depth",
)
_TASK_KEYS = ("context_len", "horizon", "stride", "split_point", "k")
_RUN_KEYS = (
    "seeds", "out_dir", "lr", "batch_series", "windows_batch", "max_steps",
    "val_check_every", "patience", "dropout",
)
_DATASET_KEYS = ("kind", "path", "n_series", "seed", "length", "limit_series", "k")


def _parse_sections(text: str) -> list[tuple[str, str | None, dict[str, str]]]:
    sections: list[tuple[str, str | None, dict[str, str]]] = []
    current: dict[str, str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        match = _SECTION_RE.match(line)
        if match:
            label = match.group(2)
            if label and "|" in label:
                raise ConfigError(f"line {lineno}: labels must not contain '|'")
            current = {}
            sections.append((match.group(1), label, current))
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: entry before any section header")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in current:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        current[key] = value
    return sections


def _to_int(name: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{name}: expected integer, got {value!r}") from None


def _to_float(name: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{name}: expected number, got {value!r}") from None


def parse_config(text: str) -> ExperimentConfig:
    task_kv: dict[str, str] = {}
    run_kv: dict[str, str] = {}
    datasets: list[DatasetSpec] = []
    models: list[ModelSpec] = []

    for kind, label, kv in _parse_sections(text):
        if kind == "task":
            _require_keys("task", kv, _TASK_KEYS)
            task_kv.update(kv)
        elif kind == "run":
            _require_keys("run", kv, _RUN_KEYS)
            run_kv.update(kv)
        elif kind == "dataset":
            if not label:
                raise ConfigError('dataset sections need a label: [dataset "name"]')
            _require_keys(f"dataset {label!r}", kv, _DATASET_KEYS)
            datasets.append(
                DatasetSpec(
                    name=label,
                    kind=kv.get("kind", "sinusoid"),
                    path=kv.get("path"),
                    n_series=_to_int("n_series", kv.get("n_series", "100")),
                    seed=_to_int("seed", kv.get("seed", "1")),
                    length=_to_int("length", kv.get("length", "1200")),
                    limit_series=_to_int("limit_series", kv.get("limit_series", "0")),
                    k=_to_int("k", kv.get("k", task_kv.get("k", "2"))),
                )
            )
        elif kind == "model":
            if not label:
                raise ConfigError('model sections need a label: [model "name"]')
            if "family" not in kv:
                raise ConfigError(f"model {label!r}: missing family")
            try:
                family = Family(kv.pop("family"))
            except ValueError as exc:
                raise ConfigError(f"model {label!r}: {exc}") from None
            overrides: dict = {}
            for key, value in kv.items():
                if key in _MODEL_ENUM_KEYS:
                    try:
                        overrides[key] = _MODEL_ENUM_KEYS[key](value)
                    except ValueError as exc:
                        raise ConfigError(f"model {label!r}: {exc}") from None
                elif key in _MODEL_INT_KEYS:
                    overrides[key] = _to_int(key, value)
                elif key == "nhits_pool_rates":
                    overrides[key] = tuple(_to_int(key, v) for v in value.split(","))
                else:
                    raise ConfigError(f"model {label!r}: unknown key {key!r}")
            models.append(ModelSpec(name=label, family=family, overrides=overrides))
        else:
            raise ConfigError(f"unknown section [{kind}]")

    task = ForecastTask(
        context_len=_to_int("context_len", task_kv.get("context_len", "256")),
        horizon=_to_int("horizon", task_kv.get("horizon", "192")),
    )
    split_point = (
        _to_int("split_point", task_kv["split_point"]) if "split_point" in task_kv else None
    )
    seeds = tuple(
        _to_int("seeds", s) for s in run_kv.get("seeds", "1,5,10").split(",")
    )
    train = TrainConfig(
        lr=_to_float("lr", run_kv.get("lr", "1e-4")),
        batch_series=_to_int("batch_series", run_kv.get("batch_series", "4")),
        windows_batch=_to_int("windows_batch", run_kv.get("windows_batch", "256")),
        max_steps=_to_int("max_steps", run_kv.get("max_steps", "2000")),
        val_check_every=_to_int("val_check_every", run_kv.get("val_check_every", "100")),
        patience=_to_int("patience", run_kv.get("patience", "20")),
        dropout=_to_float("dropout", run_kv.get("dropout", "0.0")),
    )
    return ExperimentConfig(
        task=task,
        datasets=datasets,
        models=models,
        seeds=seeds,
        stride=_to_int("stride", task_kv.get("stride", "1")),
        split_point=split_point,
        train=train,
        out_dir=run_kv.get("out_dir", "results"),
    )


def _require_keys(where: str, kv: dict[str, str], allowed) -> None:
    for key in kv:
        if key not in allowed:
            raise ConfigError(f"{where}: unknown key {key!r}")


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    return parse_config(path.read_text(encoding="utf-8"))
