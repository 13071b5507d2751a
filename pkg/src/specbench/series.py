"""Time series containers, windowing, and traditional train/test splits.

A window anchored at time ``t`` pairs the context ``y[t-l:t]`` with the
target ``y[t:t+h]`` (half-open slices), so a traditional split at ``T``
puts every training target strictly inside ``[0, T)`` and anchors every
test window at ``t >= T``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import RangeTooShort

__all__ = [
    "TimeSeries",
    "ForecastTask",
    "WindowPair",
    "SplitMode",
    "SplitDataset",
    "make_windows",
    "split_traditional",
]


@dataclass(frozen=True)
class TimeSeries:
    """A univariate signal sampled at consecutive integer indices."""

    id: str
    values: np.ndarray
    origin_index: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if not self.id:
            raise ValueError("TimeSeries.id must be non-empty")
        if values.ndim != 1 or values.size < 1:
            raise ValueError("TimeSeries.values must be a non-empty 1-d array")
        if not np.all(np.isfinite(values)):
            raise ValueError(f"TimeSeries {self.id!r} contains non-finite values")

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ForecastTask:
    """Context length ``l`` and forecast horizon ``h``."""

    context_len: int
    horizon: int

    def __post_init__(self):
        if self.context_len <= 0:
            raise ValueError("context_len must be positive")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")


@dataclass(frozen=True)
class WindowPair:
    """One supervised example: context before the anchor, target after it."""

    context: np.ndarray
    target: np.ndarray
    anchor: int

    def __post_init__(self):
        object.__setattr__(self, "context", np.asarray(self.context, dtype=np.float64))
        object.__setattr__(self, "target", np.asarray(self.target, dtype=np.float64))
        if not (np.all(np.isfinite(self.context)) and np.all(np.isfinite(self.target))):
            raise ValueError("WindowPair values must be finite")


class SplitMode(Enum):
    ID = "ID"
    OOD_COMPOSITIONAL = "OOD_COMPOSITIONAL"


@dataclass(frozen=True)
class SplitDataset:
    """Train/test window sets for one series under one paradigm."""

    train: list[WindowPair]
    test: list[WindowPair]
    mode: SplitMode

    def __post_init__(self):
        if not self.test:
            raise ValueError("SplitDataset.test must be non-empty")


def make_windows(
    series: TimeSeries,
    task: ForecastTask,
    stride: int = 1,
    bounds: tuple[int, int] | None = None,
) -> list[WindowPair]:
    """Slide (context, target) windows over ``series.values[lo:hi]``.

    Anchors run ``lo + l, lo + l + stride, ...`` subject to ``t + h <= hi``,
    giving ``floor((hi - lo - l - h) / stride) + 1`` windows.

    Raises
    ------
    RangeTooShort
        If ``hi - lo < l + h``.
    """
    if stride <= 0:
        raise ValueError("stride must be positive")
    n = len(series)
    lo, hi = bounds if bounds is not None else (0, n)
    if not (0 <= lo <= hi <= n):
        raise ValueError(f"bounds [{lo}, {hi}) outside series of length {n}")
    l, h = task.context_len, task.horizon
    if hi - lo < l + h:
        raise RangeTooShort(
            f"range [{lo}, {hi}) holds {hi - lo} samples; need at least l+h = {l + h}"
        )
    values = series.values
    windows = []
    for t in range(lo + l, hi - h + 1, stride):
        windows.append(WindowPair(values[t - l : t], values[t : t + h], t))
    return windows


def split_traditional(
    series: TimeSeries,
    task: ForecastTask,
    split_point: int,
    stride: int = 1,
) -> SplitDataset:
    """Split one series at ``T``: train targets end by ``T``, test anchors at ``>= T``.

    Requires ``T >= l + h`` (at least one train window) and
    ``len(series) >= T + h`` (at least one test window).
    """
    l, h = task.context_len, task.horizon
    T = split_point
    n = len(series)
    if T < l + h:
        raise RangeTooShort(f"split point {T} below minimum l+h = {l + h}")
    if n < T + h:
        raise RangeTooShort(f"series length {n} leaves no test window after T={T}")
    train = make_windows(series, task, stride, (0, T))
    test = make_windows(series, task, stride, (T - l, n))
    return SplitDataset(train=train, test=test, mode=SplitMode.ID)
