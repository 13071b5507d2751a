"""Experiment matrix execution, per-run persistence, and aggregation.

One run is a (dataset, model, seed, mode) cell: a single model trained on
the pooled train windows of every series in the dataset (original windows
for ID, top-k basis-sinusoid windows for OOD), then scored zero-shot on
each series' test windows. Runs persist as one JSON file per run id, so
re-running a finished matrix is a no-op and deleting a file recomputes
exactly that run. Failures are recorded as error files and never abort
the matrix.
"""
from __future__ import annotations

import hashlib
import json
import os
import time
import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..errors import SpecbenchError
from ..evaluation import (
    BASIS_WIN_THRESHOLD,
    _midranks,
    ScoreMatrix,
    basis_win_report,
    cd_analysis,
    mae,
)
from ..models import TrainedModel, count_params, estimate_flops, fit, predict
from ..preprocess import load_csv
from ..series import ForecastTask, TimeSeries, WindowPair, make_windows
from ..spectral import basis_series, dft, top_k_components
from ..synthgen import SyntheticVariant, gen_sinusoid_dataset, gen_trend_dataset
from .expconfig import DatasetSpec, ExperimentConfig, ModelSpec, load_config

__all__ = ["RunResult", "run_id", "run_matrix", "aggregate", "resolve_dataset"]

MODES = ("ID", "OOD")


@dataclass
class RunResult:
    """Outcome of one (dataset, model, seed, mode) cell."""

    run_id: str
    dataset: str
    model: str
    seed: int
    mode: str
    mae: float = float("nan")
    k_max: float = float("nan")
    threshold_pass: bool = False
    n_series: int = 0
    per_series_mae: list[float] = field(default_factory=list)
    per_series_k_max: list[float] = field(default_factory=list)
    param_count: int = 0
    flop_estimate: int = 0
    example: dict = field(default_factory=dict)
    error: str | None = None
    wall_time_s: float = 0.0

    def to_json(self) -> str:
        payload = asdict(self)
        timing = {"wall_time_s": payload.pop("wall_time_s")}
        return json.dumps(
            {"result": payload, "timing": timing}, sort_keys=True, indent=2
        ) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunResult":
        doc = json.loads(text)
        payload = dict(doc["result"])
        payload["wall_time_s"] = doc.get("timing", {}).get("wall_time_s", 0.0)
        return cls(**payload)


def run_id(
    cfg: ExperimentConfig, spec: DatasetSpec, model: ModelSpec, seed: int, mode: str
) -> str:
    """Stable id hashing everything that determines the run's output."""
    parts = [
        f"task={cfg.task.context_len},{cfg.task.horizon},{cfg.stride},{cfg.split_point}",
        f"train={cfg.train.lr},{cfg.train.windows_batch},{cfg.train.max_steps},"
        f"{cfg.train.val_check_every},{cfg.train.patience},{cfg.train.dropout}",
        f"dataset={spec.name},{spec.kind},{spec.path},{spec.n_series},{spec.seed},"
        f"{spec.length},{spec.limit_series},{spec.k}",
        f"model={model.name},{model.family.value},"
        + ",".join(f"{k}={v}" for k, v in sorted(model.overrides.items(), key=lambda kv: kv[0])),
        f"seed={seed}",
        f"mode={mode}",
    ]
    return hashlib.sha256("|".join(parts).encode("utf-8")).hexdigest()[:16]


_DATASET_CACHE: dict[tuple, list[TimeSeries]] = {}


def resolve_dataset(spec: DatasetSpec) -> list[TimeSeries]:
    """Materialize a dataset's composed series (cached per spec)."""
    key = (spec.kind, spec.path, spec.n_series, spec.seed, spec.length, spec.limit_series)
    if key in _DATASET_CACHE:
        return _DATASET_CACHE[key]
    if spec.kind == "sinusoid":
        series = gen_sinusoid_dataset(spec.n_series, seed=spec.seed, length=spec.length).composed
    elif spec.kind == "trend1":
        series = gen_trend_dataset(
            SyntheticVariant.TREND1, spec.n_series, seed=spec.seed, length=spec.length
        ).composed
    elif spec.kind == "trend2":
        series = gen_trend_dataset(
            SyntheticVariant.TREND2, spec.n_series, seed=spec.seed, length=spec.length
        ).composed
    else:
        series = load_csv(spec.path)
    if spec.limit_series:
        series = series[: spec.limit_series]
    _DATASET_CACHE[key] = series
    return series


def _train_val_windows(
    series: TimeSeries, task: ForecastTask, split_point: int, stride: int
) -> tuple[list[WindowPair], list[WindowPair]]:
    """Hold the last horizon-length slice of the train region out as validation."""
    h, l = task.horizon, task.context_len
    train = make_windows(series, task, stride, (0, split_point - h))
    val = make_windows(series, task, stride, (split_point - h - l, split_point))
    return train, val


def execute_run(
    cfg: ExperimentConfig,
    spec: DatasetSpec,
    model_spec: ModelSpec,
    seed: int,
    mode: str,
) -> RunResult:
    rid = run_id(cfg, spec, model_spec, seed, mode)
    result = RunResult(
        run_id=rid, dataset=spec.name, model=model_spec.name, seed=seed, mode=mode
    )
    started = time.perf_counter()
    try:
        model_cfg = model_spec.materialize(cfg.task)
        # window with the model's own context so context-length ablations
        # work; targets are anchored identically across models either way
        task = ForecastTask(model_cfg.context_len, cfg.task.horizon)
        series_list = resolve_dataset(spec)

        train_windows: list[WindowPair] = []
        val_windows: list[WindowPair] = []
        per_series_test: list[tuple[TimeSeries, int, list[WindowPair]]] = []
        decs = {}
        for series in series_list:
            T = cfg.split_point if cfg.split_point is not None else len(series) - task.horizon
            decs[series.id] = dft(series.values)
            if mode == "ID":
                tr, va = _train_val_windows(series, task, T, cfg.stride)
                train_windows += tr
                val_windows += va
            else:
                comps = top_k_components(decs[series.id], spec.k)
                for comp in comps:
                    basis = TimeSeries(
                        id=f"{series.id}/w{comp.freq_index}",
                        values=basis_series(comp, decs[series.id].n, (0, len(series))),
                    )
                    tr, va = _train_val_windows(basis, task, T, cfg.stride)
                    train_windows += tr
                    val_windows += va
            per_series_test.append(
                (series, T, make_windows(series, task, cfg.stride, (T - task.context_len, len(series))))
            )

        tc = dataclasses.replace(cfg.train, seed=seed)
        model: TrainedModel = fit(model_cfg, train_windows, val_windows, tc)

        example: dict = {}
        for series, T, test_windows in per_series_test:
            maes, kmaxes = [], []
            for window in test_windows:
                forecast = predict(model, window.context)
                maes.append(mae(window.target, forecast))
                report = basis_win_report(
                    window.target,
                    forecast,
                    decs[series.id],
                    (window.anchor, window.anchor + task.horizon),
                )
                kmaxes.append(float(report.k_max))
                if not example:
                    example = {
                        "series": series.id,
                        "anchor": int(window.anchor),
                        "context": window.context.tolist(),
                        "target": window.target.tolist(),
                        "forecast": forecast.tolist(),
                    }
            result.per_series_mae.append(float(np.mean(maes)))
            result.per_series_k_max.append(float(np.mean(kmaxes)))

        result.n_series = len(series_list)
        result.mae = float(np.mean(result.per_series_mae))
        result.k_max = float(np.mean(result.per_series_k_max))
        result.threshold_pass = bool(result.k_max >= BASIS_WIN_THRESHOLD)
        result.param_count = count_params(model)
        result.flop_estimate = estimate_flops(model_cfg)
        result.example = example
    except Exception as exc:  # noqa: BLE001 - matrix must survive any run failure
        result.error = f"{type(exc).__name__}: {exc}"
    result.wall_time_s = time.perf_counter() - started
    return result


def _payload_run(args: tuple[str, str, str, str, int, str]) -> str:
    config_path, out_dir, ds_name, model_name, seed, mode = args
    cfg = load_config(config_path)
    spec = next(d for d in cfg.datasets if d.name == ds_name)
    model_spec = next(m for m in cfg.models if m.name == model_name)
    result = execute_run(cfg, spec, model_spec, seed, mode)
    path = Path(out_dir) / f"{result.run_id}.json"
    path.write_text(result.to_json(), encoding="utf-8")
    return result.run_id


def run_matrix(
    cfg: ExperimentConfig,
    out_dir: str | Path | None = None,
    config_path: str | Path | None = None,
    progress=None,
) -> list[RunResult]:
    """Execute every (dataset, model, seed, mode) cell, reusing cached runs.

    ``SPECBENCH_WORKERS`` > 1 fans independent runs out to a process pool
    (requires ``config_path`` so workers can reload the experiment).
    """
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells = [
        (spec, model, seed, mode)
        for spec in cfg.datasets
        for model in cfg.models
        for seed in cfg.seeds
        for mode in MODES
    ]
    pending = []
    for spec, model, seed, mode in cells:
        rid = run_id(cfg, spec, model, seed, mode)
        if not (out / f"{rid}.json").exists():
            pending.append((spec, model, seed, mode))
        elif progress:
            progress(event="cached", run_id=rid, dataset=spec.name, model=model.name,
                     seed=seed, mode=mode)

    workers = int(os.environ.get("SPECBENCH_WORKERS", "1") or "1")
    if workers > 1 and config_path is not None and pending:
        payloads = [
            (str(config_path), str(out), spec.name, model.name, seed, mode)
            for spec, model, seed, mode in pending
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for rid in pool.map(_payload_run, payloads):
                if progress:
                    progress(event="done", run_id=rid)
    else:
        for spec, model, seed, mode in pending:
            if progress:
                progress(event="run", dataset=spec.name, model=model.name, seed=seed, mode=mode)
            result = execute_run(cfg, spec, model, seed, mode)
            (out / f"{result.run_id}.json").write_text(result.to_json(), encoding="utf-8")
            if progress:
                progress(event="done", run_id=result.run_id, mae=result.mae, error=result.error)

    results = []
    for spec, model, seed, mode in cells:
        rid = run_id(cfg, spec, model, seed, mode)
        results.append(RunResult.from_json((out / f"{rid}.json").read_text(encoding="utf-8")))
    return results


def _population_std(values: list[float]) -> float:
    arr = np.asarray(values, dtype=np.float64)
    return float(np.sqrt(np.mean((arr - arr.mean()) ** 2)))


def _midrank_positions(scores: list[float]) -> list[float]:
    return _midranks(np.asarray(scores, dtype=np.float64)).tolist()


def aggregate(results_dir: str | Path, cd_alpha: float = 0.05) -> dict:
    """Fold a directory of run files into one report document.

    Produces per-cell mean/std over seeds (population denominator),
    top-3 win counts, mean basis-win k, average ranks, and (when at least
    3 models and 2 datasets are complete) the Wilcoxon-Holm grouping.
    """
    results_dir = Path(results_dir)
    runs = []
    errors = []
    for path in sorted(results_dir.glob("*.json")):
        run = RunResult.from_json(path.read_text(encoding="utf-8"))
        if run.error is not None:
            errors.append({"run_id": run.run_id, "dataset": run.dataset,
                           "model": run.model, "seed": run.seed, "mode": run.mode,
                           "error": run.error})
        else:
            runs.append(run)
    if not runs and not errors:
        raise SpecbenchError(f"no run files found under {results_dir}")

    datasets = sorted({r.dataset for r in runs})
    models = sorted({r.model for r in runs})
    modes = sorted({r.mode for r in runs})

    cells: dict[str, dict] = {}
    by_cell: dict[tuple[str, str, str], list[RunResult]] = {}
    for run in runs:
        by_cell.setdefault((run.dataset, run.model, run.mode), []).append(run)
    missing = []
    for mode in modes:
        for dataset in datasets:
            for model in models:
                group = by_cell.get((dataset, model, mode))
                if not group:
                    missing.append(f"{dataset}|{model}|{mode}")
                    continue
                group = sorted(group, key=lambda r: r.seed)
                maes = [r.mae for r in group]
                cells[f"{dataset}|{model}|{mode}"] = {
                    "mae_mean": float(np.mean(maes)),
                    "mae_std": _population_std(maes),
                    "k_max_mean": float(np.mean([r.k_max for r in group])),
                    "threshold_pass": bool(np.mean([r.k_max for r in group]) >= BASIS_WIN_THRESHOLD),
                    "n_seeds": len(group),
                    "seeds": [r.seed for r in group],
                }

    top3: dict[str, int] = {f"{m}|{mode}": 0 for m in models for mode in modes}
    avg_ranks: dict[str, dict[str, float]] = {}
    cd_report: dict[str, dict] = {}
    for mode in modes:
        complete = all(f"{d}|{m}|{mode}" in cells for d in datasets for m in models)
        if not complete or not datasets:
            continue
        per_dataset_ranks = []
        for dataset in datasets:
            scores = [cells[f"{dataset}|{m}|{mode}"]["mae_mean"] for m in models]
            ranks = _midrank_positions(scores)
            per_dataset_ranks.append(ranks)
            for m, rank in zip(models, ranks):
                if rank <= 3:
                    top3[f"{m}|{mode}"] += 1
        mean_ranks = np.mean(np.asarray(per_dataset_ranks), axis=0)
        avg_ranks[mode] = {m: float(r) for m, r in zip(models, mean_ranks)}
        if len(models) >= 3 and len(datasets) >= 2:
            sm = ScoreMatrix(
                methods=list(models),
                datasets=list(datasets),
                scores=np.array(
                    [[cells[f"{d}|{m}|{mode}"]["mae_mean"] for d in datasets] for m in models]
                ),
            )
            cd = cd_analysis(sm, alpha=cd_alpha)
            cd_report[mode] = {
                "alpha": cd_alpha,
                "friedman_statistic": cd.friedman.statistic,
                "friedman_p": cd.friedman.p_value,
                "gate_passed": cd.gate_passed,
                "avg_ranks": {m: float(r) for m, r in zip(cd.methods, cd.avg_ranks)},
                "adjusted_p": cd.adjusted_p.tolist(),
                "groups": cd.groups,
            }

    return {
        "datasets": datasets,
        "models": models,
        "modes": modes,
        "cells": cells,
        "top3_win_counts": top3,
        "avg_ranks": avg_ranks,
        "cd": cd_report,
        "missing_cells": missing,
        "errors": errors,
    }
