"""Training losses, each usable as a differentiable graph or a plain number.

All reduce by mean over the horizon (and batch). The Student-t negative
log-likelihood keeps ``sigma > 0`` and ``nu > 2`` by construction (the
network head maps raw outputs through softplus before they get here);
its log-gamma terms run through the Lanczos primitive so the density is
differentiable in all three parameters.
"""
from __future__ import annotations

import math

import numpy as np

from ..autodiff import Tensor, absval, lgamma, log, mean, mul, power
from ..errors import ShapeMismatch
from .config import HUBER_DELTA, LossKind

__all__ = ["mae_loss", "mse_loss", "huber_loss", "student_t_nll", "loss_value"]


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def mae_loss(target, pred) -> Tensor:
    return mean(absval(_as_tensor(pred) - _as_tensor(target)))


def mse_loss(target, pred) -> Tensor:
    err = _as_tensor(pred) - _as_tensor(target)
    return mean(mul(err, err))


def huber_loss(target, pred, delta: float = HUBER_DELTA) -> Tensor:
    """Quadratic within ``delta`` of zero residual, linear beyond it.

    The branch mask is piecewise-constant in the residual, so treating it
    as data keeps the gradient exact almost everywhere.
    """
    target_t, pred_t = _as_tensor(target), _as_tensor(pred)
    resid = pred_t - target_t
    absres = absval(resid)
    small = Tensor((np.abs(pred_t.data - target_t.data) <= delta).astype(np.float64))
    quadratic = 0.5 * mul(resid, resid)
    linear = delta * (absres - 0.5 * delta)
    return mean(mul(small, quadratic) + mul(1.0 - small, linear))


def student_t_nll(target, mu, sigma, nu) -> Tensor:
    """Mean negative log density of a location-scale Student-t."""
    y = _as_tensor(target)
    mu, sigma, nu = _as_tensor(mu), _as_tensor(sigma), _as_tensor(nu)
    z = (y - mu) / sigma
    half_nu = 0.5 * nu
    nll = (
        lgamma(half_nu)
        - lgamma(half_nu + 0.5)
        + 0.5 * log(math.pi * nu)
        + log(sigma)
        + (half_nu + 0.5) * log(1.0 + mul(z, z) / nu)
    )
    return mean(nll)


def loss_value(kind: LossKind, y: np.ndarray, yhat, params: dict | None = None) -> float:
    """Scalar loss for plain arrays.

    For STUDENT_T, ``yhat`` is the ``(mu, sigma, nu)`` triple; other kinds
    take a prediction array of the same shape as ``y``.
    """
    y = np.asarray(y, dtype=np.float64)
    params = params or {}
    if kind is LossKind.STUDENT_T:
        mu, sigma, nu = (np.asarray(a, dtype=np.float64) for a in yhat)
        if not (mu.shape == sigma.shape == nu.shape == y.shape):
            raise ShapeMismatch("STUDENT_T parameter shapes must match the target")
        if np.any(sigma <= 0) or np.any(nu <= 2):
            raise ValueError("STUDENT_T needs sigma > 0 and nu > 2")
        return student_t_nll(y, mu, sigma, nu).data.item()
    yhat = np.asarray(yhat, dtype=np.float64)
    if yhat.shape != y.shape:
        raise ShapeMismatch(f"shapes {y.shape} vs {yhat.shape}")
    if kind is LossKind.MAE:
        return mae_loss(y, yhat).data.item()
    if kind is LossKind.MSE:
        return mse_loss(y, yhat).data.item()
    if kind is LossKind.HUBER:
        return huber_loss(y, yhat, params.get("delta", HUBER_DELTA)).data.item()
    raise ValueError(f"unknown loss {kind}")
