"""Closed-form and grid-fitted statistical baselines.

These families carry no gradient-trained parameters: fitting is either a
no-op (naive forecasters), a small smoothing-constant grid search
minimizing in-sample one-step MAE, or ordinary least squares for the
autoregressive baseline.
"""
from __future__ import annotations

import numpy as np

from ..errors import EmptyTrainSet
from ..series import WindowPair
from ..spectral import dft, sorted_components
from .config import Family, ModelConfig

__all__ = [
    "fit_statistical",
    "predict_statistical",
    "dominant_period",
]

SMOOTHING_GRID = np.round(np.arange(0.05, 0.951, 0.05), 2)

# Grid fitting and AR least squares cap their sample size for desk-scale
# runtime; windows are subsampled evenly, which keeps fits deterministic.
_MAX_FIT_WINDOWS = 64
_MAX_AR_ROWS = 200_000


def _sequences(train: list[WindowPair], cap: int = _MAX_FIT_WINDOWS) -> np.ndarray:
    if not train:
        raise EmptyTrainSet("statistical fit needs at least one window")
    idx = np.unique(np.linspace(0, len(train) - 1, min(cap, len(train))).astype(int))
    return np.stack([np.concatenate([train[i].context, train[i].target]) for i in idx])


def dominant_period(context: np.ndarray) -> int:
    """Period (in samples) of the largest non-DC spectral bin of the context."""
    comps = [c for c in sorted_components(dft(context)) if c.freq_index > 0]
    if not comps:
        return 1
    return max(1, round(len(context) / comps[0].freq_index))


def _ses_sweep(seqs: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    """Mean one-step absolute error per alpha (levels start at the first value)."""
    W, L = seqs.shape
    level = np.repeat(seqs[:, :1], len(alphas), axis=1)
    err = np.zeros(len(alphas))
    for t in range(1, L):
        err += np.abs(seqs[:, t : t + 1] - level).sum(axis=0)
        level = alphas[None, :] * seqs[:, t : t + 1] + (1 - alphas[None, :]) * level
    return err / (W * (L - 1))


def _holt_sweep(seqs: np.ndarray, alphas: np.ndarray, betas: np.ndarray) -> np.ndarray:
    """Mean one-step absolute error per (alpha, beta) pair, flattened."""
    W, L = seqs.shape
    A = len(alphas) * len(betas)
    a = np.repeat(alphas, len(betas))[None, :]
    b = np.tile(betas, len(alphas))[None, :]
    # state sits at time 1: l1 = y1, b1 = y1 - y0
    level = np.repeat(seqs[:, 1:2], A, axis=1)
    trend = np.repeat(seqs[:, 1:2] - seqs[:, :1], A, axis=1)
    err = np.zeros(A)
    for t in range(2, L):
        pred = level + trend
        err += np.abs(seqs[:, t : t + 1] - pred).sum(axis=0)
        new_level = a * seqs[:, t : t + 1] + (1 - a) * pred
        trend = b * (new_level - level) + (1 - b) * trend
        level = new_level
    return err / (W * (L - 2))


def _fit_ar(train: list[WindowPair], order: int) -> np.ndarray:
    seq_len = train[0].context.size + train[0].target.size
    cap = max(1, _MAX_AR_ROWS // max(1, seq_len - order))
    seqs = _sequences(train, cap=cap)
    rows, targets = [], []
    for seq in seqs:
        for t in range(order, seq.size):
            rows.append(seq[t - order : t][::-1])
            targets.append(seq[t])
    X = np.column_stack([np.asarray(rows), np.ones(len(rows))])
    beta, *_ = np.linalg.lstsq(X, np.asarray(targets), rcond=None)
    return beta  # (order lags, most recent first) then intercept


def fit_statistical(config: ModelConfig, train: list[WindowPair]) -> dict[str, np.ndarray]:
    family = config.family
    if family in (Family.NAIVE_LAST, Family.SEASONAL_NAIVE):
        return {}
    if family is Family.SES:
        errors = _ses_sweep(_sequences(train), SMOOTHING_GRID)
        return {"alpha": np.array([SMOOTHING_GRID[int(np.argmin(errors))]])}
    if family is Family.HOLT:
        errors = _holt_sweep(_sequences(train), SMOOTHING_GRID, SMOOTHING_GRID)
        best = int(np.argmin(errors))
        alpha = SMOOTHING_GRID[best // len(SMOOTHING_GRID)]
        beta = SMOOTHING_GRID[best % len(SMOOTHING_GRID)]
        return {"alpha": np.array([alpha]), "beta": np.array([beta])}
    if family is Family.AR_LS:
        return {"coef": _fit_ar(train, config.ar_order)}
    raise ValueError(f"{family} is not a statistical family")


def predict_statistical(
    config: ModelConfig, extra: dict[str, np.ndarray], context: np.ndarray
) -> np.ndarray:
    family = config.family
    h = config.horizon
    context = np.asarray(context, dtype=np.float64)
    if family is Family.NAIVE_LAST:
        return np.full(h, context[-1])
    if family is Family.SEASONAL_NAIVE:
        period = dominant_period(context)
        last_cycle = context[-period:]
        return np.resize(last_cycle, h)
    if family is Family.SES:
        alpha = float(extra["alpha"][0])
        level = context[0]
        for value in context[1:]:
            level = alpha * value + (1 - alpha) * level
        return np.full(h, level)
    if family is Family.HOLT:
        alpha = float(extra["alpha"][0])
        beta = float(extra["beta"][0])
        level = context[1]
        trend = context[1] - context[0]
        for value in context[2:]:
            pred = level + trend
            new_level = alpha * value + (1 - alpha) * pred
            trend = beta * (new_level - level) + (1 - beta) * trend
            level = new_level
        return level + trend * np.arange(1, h + 1)
    if family is Family.AR_LS:
        beta = extra["coef"]
        order = beta.size - 1
        buf = list(context[-order:][::-1])  # most recent first
        out = np.empty(h)
        for i in range(h):
            nxt = float(np.dot(beta[:-1], buf) + beta[-1])
            out[i] = nxt
            buf = [nxt] + buf[:-1]
        return out
    raise ValueError(f"{family} is not a statistical family")
