"""Real-data ingestion: CSV loading, fixed-length segmentation, a unit-root
screen, and autocorrelation-ranked selection of the final subseries.

The CSV schema is long format with header ``unique_id,ds,y``: ``unique_id``
names the series, ``ds`` is an opaque timestamp string the math never
touches, and ``y`` is a decimal literal. Files are UTF-8 with LF line
endings and unquoted numeric fields.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateInput,
    EmptyFile,
    NotEnoughStationary,
    SchemaError,
    TooShort,
    ZeroVariance,
)
from .series import TimeSeries

__all__ = [
    "Segment",
    "AdfReport",
    "load_csv",
    "write_csv",
    "segment",
    "adf_test",
    "mean_acf",
    "select_series",
]

PATCH_LEN = 1056
PATCH_STRIDE = 528
ADF_ALPHA = 0.001
ACF_LAGS = 48


@dataclass(frozen=True)
class Segment:
    """A fixed-length slice of a parent series."""

    parent_id: str
    offset: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("Segment.values must be a non-empty 1-d array")
        if not np.all(np.isfinite(values)):
            raise ValueError("Segment.values must be finite")

    @property
    def id(self) -> str:
        return f"{self.parent_id}_{self.offset}"


@dataclass(frozen=True)
class AdfReport:
    """Unit-root regression outcome; ``stationary`` iff ``p_value < alpha``."""

    statistic: float
    p_value: float
    lag_used: int
    stationary: bool


def load_csv(path: str | Path) -> list[TimeSeries]:
    """Read long-format CSV into one TimeSeries per unique_id (file order)."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path} is empty") from None
        if header[:3] != ["unique_id", "ds", "y"]:
            raise SchemaError(f"{path} header is {header!r}, expected unique_id,ds,y")
        order: list[str] = []
        buckets: dict[str, list[float]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise SchemaError(f"{path}:{lineno} has {len(row)} fields, expected 3")
            uid, _, y = row
            try:
                value = float(y)
            except ValueError:
                raise SchemaError(f"{path}:{lineno} non-numeric y field {y!r}") from None
            if uid not in buckets:
                order.append(uid)
                buckets[uid] = []
            buckets[uid].append(value)
    if not order:
        raise EmptyFile(f"{path} has a header but no data rows")
    return [TimeSeries(id=uid, values=np.array(buckets[uid])) for uid in order]


def write_csv(path: str | Path, series: list[TimeSeries]) -> None:
    """Write series in the load_csv schema; ``ds`` is the integer sample index."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("unique_id,ds,y\n")
        for ts in series:
            for t, value in enumerate(ts.values, start=ts.origin_index):
                fh.write(f"{ts.id},{t},{float(value)!r}\n")


def segment(
    series: TimeSeries,
    patch_len: int = PATCH_LEN,
    stride: int = PATCH_STRIDE,
) -> list[Segment]:
    """Cut a series into fixed patches; the trailing remainder is dropped."""
    n = len(series)
    if n < patch_len:
        raise TooShort(f"series {series.id!r} has {n} samples, needs {patch_len}")
    count = (n - patch_len) // stride + 1
    return [
        Segment(series.id, off, series.values[off : off + patch_len])
        for off in (i * stride for i in range(count))
    ]


# MacKinnon (1994, 2010) response-surface constants for the constant-only
# unit-root regression: clip bounds and the small/large-statistic
# polynomials (ascending powers) whose value feeds the normal CDF.
_TAU_MAX = 2.74
_TAU_MIN = -18.83
_TAU_STAR = -1.61
_TAU_SMALLP = (2.1659, 1.4412, 3.8269e-2)
_TAU_LARGEP = (1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2)


def _norm_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def _mackinnon_pvalue(stat: float) -> float:
    if stat > _TAU_MAX:
        return 1.0
    if stat < _TAU_MIN:
        return 0.0
    coeffs = _TAU_SMALLP if stat <= _TAU_STAR else _TAU_LARGEP
    poly = 0.0
    for c in reversed(coeffs):
        poly = poly * stat + c
    return _norm_cdf(poly)


def _ols_tvalue_first(X: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """OLS of y on X; returns (t-value of column 0, residual sum of squares).

    Near-perfect fits (noiseless deterministic series) give a vanishing
    standard error; the statistic is pushed to +-inf, which the MacKinnon
    surface clips to p = 0 or 1.
    """
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    ssr = float(resid @ resid)
    n, k = X.shape
    sigma2 = ssr / (n - k)
    xtx_inv = np.linalg.pinv(X.T @ X)
    var0 = sigma2 * max(float(xtx_inv[0, 0]), 0.0)
    se0 = math.sqrt(var0)
    if se0 == 0.0 or not math.isfinite(se0):
        return math.copysign(math.inf, beta[0]), ssr
    return float(beta[0] / se0), ssr


def _lagged_design(x: np.ndarray, lags: int) -> tuple[np.ndarray, np.ndarray]:
    """Dependent first difference and regressors [level_{t-1}, diff lags 1..lags]."""
    dx = np.diff(x)
    nobs = dx.size - lags
    cols = [x[-nobs - 1 : -1]]
    cols += [dx[lags - i - 1 : lags - i - 1 + nobs] for i in range(lags)]
    return dx[-nobs:], np.column_stack(cols)


def adf_test(values: np.ndarray, alpha: float = ADF_ALPHA, max_lag: int | None = None) -> AdfReport:
    """Augmented Dickey-Fuller test with a constant-only regression.

    The difference-lag order is chosen by AIC over ``0..max_lag`` (Schwert's
    ``12 * (n/100)^{1/4}`` bound by default) on a common sample, then the
    regression is refit at the chosen order on the longest usable sample.
    The p-value comes from the MacKinnon approximate response surface.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.size < 20:
        raise ValueError("adf_test needs a 1-d array of length >= 20")
    if not np.all(np.isfinite(x)):
        raise ValueError("adf_test input must be finite")
    if x.max() == x.min():
        raise DegenerateInput("constant series: unit-root statistic undefined")
    n = x.size
    if max_lag is None:
        max_lag = int(math.ceil(12.0 * (n / 100.0) ** 0.25))
        max_lag = min(n // 2 - 2, max_lag)
    if max_lag < 0:
        raise ValueError("series too short for the lag search")

    # Lag order by AIC on the max_lag-trimmed sample so candidates share
    # observations; nested regressors [const, level, diff lags 0..max_lag].
    y_sel, X_sel = _lagged_design(x, max_lag)
    full = np.column_stack([np.ones_like(y_sel), X_sel])
    nobs = y_sel.size
    best = None
    for p in range(max_lag + 1):
        Xp = full[:, : 2 + p]
        beta, *_ = np.linalg.lstsq(Xp, y_sel, rcond=None)
        resid = y_sel - Xp @ beta
        ssr = float(resid @ resid)
        aic = nobs * math.log(ssr / nobs) + 2.0 * (2 + p)
        if best is None or (aic, p) < best:
            best = (aic, p)
    lag_used = best[1]

    y_fit, X_fit = _lagged_design(x, lag_used)
    design = np.column_stack([X_fit, np.ones_like(y_fit)])
    stat, _ = _ols_tvalue_first(design, y_fit)
    p_value = _mackinnon_pvalue(stat)
    return AdfReport(
        statistic=stat,
        p_value=p_value,
        lag_used=lag_used,
        stationary=bool(p_value < alpha),
    )


def mean_acf(values: np.ndarray, nlags: int = ACF_LAGS) -> float:
    """Mean of the biased sample autocorrelation over lags 1..nlags."""
    y = np.asarray(values, dtype=np.float64)
    if nlags < 1:
        raise ValueError("nlags must be >= 1")
    if y.size <= nlags:
        raise ValueError("series must be longer than nlags")
    centered = y - y.mean()
    denom = float(centered @ centered)
    if denom == 0.0:
        raise ZeroVariance("autocorrelation undefined for a constant series")
    acf = [float(centered[:-lag] @ centered[lag:]) / denom for lag in range(1, nlags + 1)]
    return float(np.mean(acf))


def select_series(
    segments: list[Segment],
    keep: int = 100,
    alpha: float = ADF_ALPHA,
    nlags: int = ACF_LAGS,
) -> list[Segment]:
    """Drop segments that fail the stationarity screen, rank survivors by
    mean autocorrelation, and keep the top ``keep`` (stable tie-break by
    parent id and offset)."""
    survivors = []
    for seg in segments:
        try:
            report = adf_test(seg.values, alpha=alpha)
        except DegenerateInput:
            continue
        if report.stationary:
            survivors.append((mean_acf(seg.values, nlags=nlags), seg))
    if len(survivors) < keep:
        raise NotEnoughStationary(
            f"only {len(survivors)} stationary segments, need {keep}"
        )
    survivors.sort(key=lambda item: (-item[0], item[1].parent_id, item[1].offset))
    return [seg for _, seg in survivors[:keep]]
