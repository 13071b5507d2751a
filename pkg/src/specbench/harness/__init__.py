"""Configuration-driven experiment matrix, persistence, plotting, and CLI."""
from __future__ import annotations

from .expconfig import DatasetSpec, ExperimentConfig, ModelSpec, load_config, parse_config
from .plotting import cd_diagram_svg, plot_forecast
from .runner import RunResult, aggregate, resolve_dataset, run_id, run_matrix

__all__ = [
    "DatasetSpec", "ModelSpec", "ExperimentConfig", "parse_config", "load_config",
    "RunResult", "run_id", "run_matrix", "aggregate", "resolve_dataset",
    "plot_forecast", "cd_diagram_svg",
]
