"""Per-window scaling: standardize by context statistics, invert on forecasts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Scaler

__all__ = ["ScalerState", "fit_scaler", "apply_scaler", "invert_scaler"]

_EPS = 1e-8


@dataclass(frozen=True)
class ScalerState:
    """Per-row shift/scale; arrays have shape (batch, 1)."""

    shift: np.ndarray
    scale: np.ndarray


def fit_scaler(kind: Scaler, context: np.ndarray) -> ScalerState:
    """Fit shift/scale per context row (1-d contexts are treated as one row)."""
    ctx = np.atleast_2d(np.asarray(context, dtype=np.float64))
    if kind is Scaler.REVIN_STANDARD:
        shift = ctx.mean(axis=1, keepdims=True)
        scale = ctx.std(axis=1, keepdims=True) + _EPS
    elif kind is Scaler.ROBUST:
        shift = np.median(ctx, axis=1, keepdims=True)
        scale = np.median(np.abs(ctx - shift), axis=1, keepdims=True) + _EPS
    else:
        raise ValueError(f"unknown scaler {kind}")
    return ScalerState(shift=shift, scale=scale)


def apply_scaler(state: ScalerState, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        return ((values[None, :] - state.shift) / state.scale)[0]
    return (values - state.shift) / state.scale


def invert_scaler(state: ScalerState, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        return (values[None, :] * state.scale + state.shift)[0]
    return values * state.scale + state.shift
