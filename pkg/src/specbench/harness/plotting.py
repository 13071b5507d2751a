"""Deterministic SVG renderings: forecast overlays and rank diagrams.

SVGs are assembled as plain strings with fixed-precision coordinates and
no timestamps or generated ids, so identical inputs produce identical
bytes (golden-file friendly).
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..evaluation import CdAnalysis

__all__ = ["plot_forecast", "cd_diagram_svg"]

_PALETTE = (
    "#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#e67e22",
    "#16a085", "#7f8c8d", "#d35400", "#2c3e50", "#a04000",
)
_WIDTH, _HEIGHT = 760.0, 380.0
_MARGIN = 46.0


def _fmt(value: float) -> str:
    return f"{value:.3f}".rstrip("0").rstrip(".")


def _polyline(xs, ys, color: str, dash: str = "") -> str:
    points = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(xs, ys))
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (
        f'<polyline fill="none" stroke="{color}" stroke-width="1.4"{dash_attr} '
        f'points="{points}"/>'
    )


def plot_forecast(
    context: np.ndarray,
    target: np.ndarray,
    forecasts: dict[str, np.ndarray],
    path: str | Path | None = None,
    title: str = "",
) -> str:
    """Overlay context, ground-truth target, and per-model forecasts.

    Returns the SVG text; writes it to ``path`` when given.
    """
    context = np.asarray(context, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    l, h = context.size, target.size
    series = [context, target] + [np.asarray(f, dtype=np.float64) for f in forecasts.values()]
    lo = min(float(s.min()) for s in series)
    hi = max(float(s.max()) for s in series)
    if hi == lo:
        hi = lo + 1.0
    span_x = _WIDTH - 2 * _MARGIN
    span_y = _HEIGHT - 2 * _MARGIN

    def sx(t: float) -> float:
        return _MARGIN + span_x * t / max(l + h - 1, 1)

    def sy(v: float) -> float:
        return _HEIGHT - _MARGIN - span_y * (v - lo) / (hi - lo)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(_WIDTH)}" '
        f'height="{_fmt(_HEIGHT)}" viewBox="0 0 {_fmt(_WIDTH)} {_fmt(_HEIGHT)}">',
        f'<rect x="0" y="0" width="{_fmt(_WIDTH)}" height="{_fmt(_HEIGHT)}" fill="white"/>',
        f'<rect x="{_fmt(_MARGIN)}" y="{_fmt(_MARGIN)}" width="{_fmt(span_x)}" '
        f'height="{_fmt(span_y)}" fill="none" stroke="#444444" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_fmt(_WIDTH / 2)}" y="24" text-anchor="middle" '
            f'font-family="monospace" font-size="13">{title}</text>'
        )
    split_x = sx(l - 1)
    parts.append(
        f'<line x1="{_fmt(split_x)}" y1="{_fmt(_MARGIN)}" x2="{_fmt(split_x)}" '
        f'y2="{_fmt(_HEIGHT - _MARGIN)}" stroke="#999999" stroke-width="1" '
        f'stroke-dasharray="4 3"/>'
    )
    xs_ctx = [sx(t) for t in range(l)]
    parts.append(_polyline(xs_ctx, [sy(v) for v in context], "#444444"))
    xs_fut = [sx(l - 1 + t) for t in range(1, h + 1)]
    parts.append(_polyline(xs_fut, [sy(v) for v in target], "#111111"))

    legend_y = _MARGIN + 14
    parts.append(
        f'<text x="{_fmt(_MARGIN + 8)}" y="{_fmt(legend_y)}" font-family="monospace" '
        f'font-size="11" fill="#111111">ground truth</text>'
    )
    for i, (name, forecast) in enumerate(forecasts.items()):
        color = _PALETTE[i % len(_PALETTE)]
        parts.append(_polyline(xs_fut, [sy(v) for v in np.asarray(forecast)], color, dash="6 2"))
        legend_y += 14
        parts.append(
            f'<text x="{_fmt(_MARGIN + 8)}" y="{_fmt(legend_y)}" font-family="monospace" '
            f'font-size="11" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"
    if path is not None:
        Path(path).write_text(svg, encoding="utf-8")
    return svg


def cd_diagram_svg(cd: CdAnalysis, path: str | Path | None = None) -> str:
    """Average-rank axis with bars joining methods that are not
    significantly different."""
    order = np.argsort(cd.avg_ranks, kind="stable")
    methods = [cd.methods[i] for i in order]
    ranks = [float(cd.avg_ranks[i]) for i in order]
    m = len(methods)
    width, row_h = 640.0, 22.0
    axis_y = 40.0
    height = axis_y + 30 + row_h * (m + len(cd.groups)) + 20
    lo, hi = 1.0, float(max(m, 2))

    def sx(rank: float) -> float:
        return 60.0 + (width - 120.0) * (rank - lo) / (hi - lo)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<rect x="0" y="0" width="{_fmt(width)}" height="{_fmt(height)}" fill="white"/>',
        f'<line x1="{_fmt(sx(lo))}" y1="{_fmt(axis_y)}" x2="{_fmt(sx(hi))}" '
        f'y2="{_fmt(axis_y)}" stroke="#111111" stroke-width="1.2"/>',
    ]
    for tick in range(1, m + 1):
        x = sx(float(tick))
        parts.append(
            f'<line x1="{_fmt(x)}" y1="{_fmt(axis_y - 4)}" x2="{_fmt(x)}" '
            f'y2="{_fmt(axis_y + 4)}" stroke="#111111" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(axis_y - 8)}" text-anchor="middle" '
            f'font-family="monospace" font-size="10">{tick}</text>'
        )
    y = axis_y + 24
    for name, rank in zip(methods, ranks):
        x = sx(rank)
        parts.append(
            f'<line x1="{_fmt(x)}" y1="{_fmt(axis_y)}" x2="{_fmt(x)}" y2="{_fmt(y - 6)}" '
            f'stroke="#888888" stroke-width="0.8"/>'
        )
        parts.append(
            f'<text x="{_fmt(x + 4)}" y="{_fmt(y)}" font-family="monospace" '
            f'font-size="11">{name} ({_fmt(rank)})</text>'
        )
        y += row_h
    rank_of = dict(zip(methods, ranks))
    for group in cd.groups:
        if len(group) < 2:
            continue
        x1 = sx(min(rank_of[g] for g in group))
        x2 = sx(max(rank_of[g] for g in group))
        parts.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y)}" x2="{_fmt(x2)}" y2="{_fmt(y)}" '
            f'stroke="#111111" stroke-width="4"/>'
        )
        y += row_h
    note = "Friedman gate passed" if cd.gate_passed else "Friedman gate NOT passed"
    parts.append(
        f'<text x="60" y="{_fmt(y + 4)}" font-family="monospace" font-size="10" '
        f'fill="#555555">{note} (p={cd.friedman.p_value:.4g})</text>'
    )
    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"
    if path is not None:
        Path(path).write_text(svg, encoding="utf-8")
    return svg
