"""Shared test utilities: naive oracles and finite-difference gradient checks."""
from __future__ import annotations

import numpy as np

from specbench.autodiff import Tape, Tensor, backward, recording


def naive_dft(values: np.ndarray) -> np.ndarray:
    """O(n^2) transform written from the definition, independent of the library."""
    n = len(values)
    coeffs = np.zeros(n, dtype=np.complex128)
    for w in range(n):
        total = 0.0 + 0.0j
        for t in range(n):
            total += values[t] * np.exp(-2j * np.pi * w * t / n)
        coeffs[w] = total / n
    return coeffs


def kink_margin(loss_fn) -> float:
    """Smallest |input| reaching a relu or absval on the loss graph.

    Central differences are only trustworthy when this margin comfortably
    exceeds the finite-difference step, so checks redraw their random
    evaluation point until it does.
    """
    tape = Tape()
    with recording(tape):
        loss_fn()
    margin = np.inf
    for op, _, inputs, _ in tape.records:
        if op in ("relu", "absval"):
            margin = min(margin, float(np.abs(inputs[0].data).min()))
    return margin


def kink_safe_targets(pred_values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Targets whose residuals stay clear of the non-smooth points of the
    piecewise losses (0 for MAE, and +-delta for Huber), so central
    differences do not straddle a kink."""
    low = rng.uniform(0.15, 0.8, size=pred_values.shape)
    high = rng.uniform(1.2, 2.0, size=pred_values.shape)
    magnitude = np.where(rng.random(pred_values.shape) < 0.5, low, high)
    signs = np.where(rng.random(pred_values.shape) < 0.5, 1.0, -1.0)
    return pred_values - signs * magnitude


def fd_gradcheck(
    loss_fn,
    params: dict[str, Tensor],
    step: float = 1e-5,
    max_entries: int = 24,
    rng: np.random.Generator | None = None,
) -> float:
    """Compare tape gradients of ``loss_fn()`` against central differences.

    Checks every entry of small parameters and a random sample of larger
    ones; returns the worst relative error (denominator floored at 1 so
    near-zero gradients are compared absolutely).
    """
    rng = rng or np.random.default_rng(0)
    tape = Tape()
    with recording(tape):
        loss = loss_fn()
    names = sorted(params)
    grads = dict(zip(names, backward(tape, loss, [params[n] for n in names])))

    worst = 0.0
    for name in names:
        tensor = params[name]
        flat = tensor.data.reshape(-1)
        if flat.size <= max_entries:
            entries = np.arange(flat.size)
        else:
            entries = rng.choice(flat.size, size=max_entries, replace=False)
        analytic = grads[name].reshape(-1)
        for idx in entries:
            original = flat[idx]
            flat[idx] = original + step
            up = loss_fn().data.item()
            flat[idx] = original - step
            down = loss_fn().data.item()
            flat[idx] = original
            numeric = (up - down) / (2.0 * step)
            denom = max(1.0, abs(analytic[idx]), abs(numeric))
            worst = max(worst, abs(analytic[idx] - numeric) / denom)
    return worst
