"""Forecast scoring and model comparison.

Covers the point metric (MAE), the spectral basis-win metrics that gate
compositional reasoning, the rank-based test battery (Friedman gate,
pairwise Wilcoxon signed-rank with Holm correction, critical-difference
grouping), and linear CKA for representation similarity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DegenerateInput, ShapeMismatch, TooFewMethods
from .spectral import SpectralDecomposition, basis_series, sorted_components

__all__ = [
    "ScoreMatrix",
    "BasisWinReport",
    "FriedmanResult",
    "CdAnalysis",
    "mae",
    "topk_basis_win",
    "topk_max",
    "basis_win_report",
    "friedman",
    "wilcoxon_signed_rank",
    "holm_correct",
    "cd_analysis",
    "linear_cka",
]

BASIS_WIN_THRESHOLD = 2  # smallest k_max that counts as evidence of composition


@dataclass(frozen=True)
class ScoreMatrix:
    """Methods x datasets score table (mean MAE over seeds; lower is better)."""

    methods: list[str]
    datasets: list[str]
    scores: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        object.__setattr__(self, "scores", scores)
        if scores.shape != (len(self.methods), len(self.datasets)):
            raise ValueError("scores must be shaped (methods, datasets)")
        if len(self.methods) < 2 or len(self.datasets) < 1:
            raise ValueError("need at least 2 methods and 1 dataset")
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores must be finite")


@dataclass(frozen=True)
class BasisWinReport:
    """Per-series basis-win outcome; ``threshold_pass`` is k_max >= 2."""

    k_max: int
    wins: list[bool]
    threshold_pass: bool


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    p_value: float
    reject: bool
    avg_ranks: np.ndarray


@dataclass(frozen=True)
class CdAnalysis:
    """Average ranks, Holm-adjusted pairwise p matrix, and rank-ordered
    groups of methods with no significant internal difference."""

    methods: list[str]
    avg_ranks: np.ndarray
    adjusted_p: np.ndarray
    groups: list[list[str]]
    friedman: FriedmanResult
    gate_passed: bool


def mae(y: np.ndarray, yhat: np.ndarray) -> float:
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape or y.size < 1:
        raise ShapeMismatch(f"shapes {y.shape} vs {yhat.shape}")
    return float(np.mean(np.abs(y - yhat)))


def _partial_sum_errors(
    y: np.ndarray, dec: SpectralDecomposition, bounds: tuple[int, int]
) -> np.ndarray:
    """MAE of the cumulative top-k reconstruction against y, for every k."""
    comps = sorted_components(dec)
    running = np.zeros_like(np.asarray(y, dtype=np.float64))
    errors = np.empty(len(comps))
    for i, comp in enumerate(comps):
        running = running + basis_series(comp, dec.n, bounds)
        errors[i] = np.mean(np.abs(y - running))
    return errors


def topk_basis_win(
    y: np.ndarray,
    yhat: np.ndarray,
    dec: SpectralDecomposition,
    k: int,
    bounds: tuple[int, int],
) -> bool:
    """True iff the forecast error is <= the top-k partial-sum error on
    the same index range."""
    errors = _partial_sum_errors(y, dec, bounds)
    if not 1 <= k <= errors.size:
        from .errors import KTooLarge

        raise KTooLarge(f"k={k} outside 1..{errors.size}")
    return mae(y, yhat) <= errors[k - 1]


def topk_max(
    y: np.ndarray,
    yhat: np.ndarray,
    dec: SpectralDecomposition,
    bounds: tuple[int, int],
) -> int:
    """Largest k whose basis win holds; 0 if none.

    Partial-sum MAE is not monotone in k, so every k is scanned.
    """
    errors = _partial_sum_errors(y, dec, bounds)
    score = mae(y, yhat)
    winning = np.nonzero(score <= errors)[0]
    return int(winning[-1] + 1) if winning.size else 0


def basis_win_report(
    y: np.ndarray,
    yhat: np.ndarray,
    dec: SpectralDecomposition,
    bounds: tuple[int, int],
) -> BasisWinReport:
    errors = _partial_sum_errors(y, dec, bounds)
    score = mae(y, yhat)
    wins = [bool(score <= e) for e in errors]
    k_max = max((i + 1 for i, w in enumerate(wins) if w), default=0)
    return BasisWinReport(
        k_max=k_max, wins=wins, threshold_pass=k_max >= BASIS_WIN_THRESHOLD
    )


def _midranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with tied values sharing their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    ordered = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and ordered[j + 1] == ordered[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def rank_table(sm: ScoreMatrix) -> np.ndarray:
    """Per-dataset method ranks (methods x datasets), rank 1 = lowest score."""
    return np.column_stack(
        [_midranks(sm.scores[:, j]) for j in range(len(sm.datasets))]
    )


def friedman(sm: ScoreMatrix, alpha: float = 0.2) -> FriedmanResult:
    """Friedman chi-square over average method ranks across datasets."""
    M, D = sm.scores.shape
    if M < 3 or D < 2:
        raise TooFewMethods("Friedman needs >= 3 methods and >= 2 datasets")
    avg_ranks = rank_table(sm).mean(axis=1)
    centered = avg_ranks - (M + 1) / 2.0
    statistic = 12.0 * D / (M * (M + 1)) * float(centered @ centered)
    df = M - 1
    p_value = float(special.gammaincc(df / 2.0, statistic / 2.0))
    return FriedmanResult(
        statistic=statistic,
        p_value=p_value,
        reject=bool(p_value < alpha),
        avg_ranks=avg_ranks,
    )


def _signed_rank_statistic(a, b) -> tuple[float, np.ndarray] | None:
    """(W+, midranks of |d|) after dropping zero differences; None if all zero."""
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    diff = diff[diff != 0.0]
    if diff.size == 0:
        return None
    ranks = _midranks(np.abs(diff))
    w_plus = float(ranks[diff > 0].sum())
    return w_plus, ranks


def _exact_signed_rank_p(w_plus: float, ranks: np.ndarray) -> float:
    """Two-sided p by full enumeration of the 2^n sign assignments.

    Counting runs over doubled ranks (midranks are half-integers) so all
    sums are exact integers.
    """
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: counts.size - r]
        counts = counts + shifted
    w2 = int(round(2.0 * w_plus))
    n_assign = 2.0 ** len(ranks)
    p_le = counts[: w2 + 1].sum() / n_assign
    p_ge = counts[w2:].sum() / n_assign
    return min(1.0, 2.0 * min(p_le, p_ge))


def _normal_signed_rank_p(w_plus: float, ranks: np.ndarray) -> float:
    """Normal approximation with tie and continuity corrections."""
    n = len(ranks)
    mu = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var -= float(np.sum(tie_counts**3 - tie_counts)) / 48.0
    if var <= 0:
        return 1.0
    d = w_plus - mu
    z = (d - 0.5 * np.sign(d)) / math.sqrt(var)
    return float(min(1.0, 2.0 * 0.5 * math.erfc(abs(z) / math.sqrt(2.0))))


EXACT_WILCOXON_LIMIT = 12


def wilcoxon_signed_rank(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sided paired Wilcoxon p-value.

    Zero differences are dropped (all-zero pairs give p = 1); the null is
    enumerated exactly for n <= 12 nonzero differences and approximated
    normally (tie + continuity corrections) beyond that.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.size < 3:
        raise ShapeMismatch("paired samples must share a length >= 3")
    stat = _signed_rank_statistic(a, b)
    if stat is None:
        return 1.0
    w_plus, ranks = stat
    if len(ranks) <= EXACT_WILCOXON_LIMIT:
        return _exact_signed_rank_p(w_plus, ranks)
    return _normal_signed_rank_p(w_plus, ranks)


def holm_correct(pvalues) -> list[float]:
    """Step-down Holm adjustment, returned in the input order."""
    p = np.asarray(pvalues, dtype=np.float64)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    adjusted = np.empty(m)
    running = 0.0
    for i, idx in enumerate(order):
        running = max(running, min(1.0, (m - i) * p[idx]))
        adjusted[idx] = running
    return adjusted.tolist()


def cd_analysis(
    sm: ScoreMatrix, alpha: float = 0.05, friedman_alpha: float = 0.2
) -> CdAnalysis:
    """Average ranks plus Wilcoxon-Holm grouping for a critical-difference view.

    The Friedman gate is evaluated first; when it fails the grouping is
    still reported with ``gate_passed=False`` rather than raising.
    """
    fried = friedman(sm, alpha=friedman_alpha)
    M = len(sm.methods)
    raw = []
    pairs = [(i, j) for i in range(M) for j in range(i + 1, M)]
    for i, j in pairs:
        raw.append(wilcoxon_signed_rank(sm.scores[i], sm.scores[j]))
    adjusted_list = holm_correct(raw)
    adjusted = np.ones((M, M))
    for (i, j), p in zip(pairs, adjusted_list):
        adjusted[i, j] = adjusted[j, i] = p

    order = np.argsort(fried.avg_ranks, kind="stable")
    groups: list[list[str]] = []
    last_end = -1
    for start in range(M):
        end = start
        while end + 1 < M and np.all(
            adjusted[np.ix_(order[start : end + 2], order[start : end + 2])] >= alpha
        ):
            end += 1
        if end > last_end:
            groups.append([sm.methods[k] for k in order[start : end + 1]])
            last_end = end
    return CdAnalysis(
        methods=list(sm.methods),
        avg_ranks=fried.avg_ranks,
        adjusted_p=adjusted,
        groups=groups,
        friedman=fried,
        gate_passed=fried.reject,
    )


def linear_cka(X: np.ndarray, Y: np.ndarray) -> float:
    """Similarity of two representation matrices on the same samples.

    ``|Xc' Yc|_F^2 / (|Xc' Xc|_F * |Yc' Yc|_F)`` with column-mean
    centering; invariant to orthogonal maps and isotropic scaling.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0] or X.shape[0] < 2:
        raise ShapeMismatch("X and Y must be 2-d with the same row count >= 2")
    Xc = X - X.mean(axis=0, keepdims=True)
    Yc = Y - Y.mean(axis=0, keepdims=True)
    cross = np.linalg.norm(Xc.T @ Yc) ** 2
    norm_x = np.linalg.norm(Xc.T @ Xc)
    norm_y = np.linalg.norm(Yc.T @ Yc)
    if norm_x == 0.0 or norm_y == 0.0:
        raise DegenerateInput("zero-variance representation matrix")
    return float(cross / (norm_x * norm_y))
