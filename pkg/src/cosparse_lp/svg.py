"""Minimal deterministic SVG line plots (fixed canvas, axes, legend)."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 800, 600
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 90, 200, 50, 70
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")


def _num(v: float) -> str:
    return f"{v:.2f}"


def _label(v: float) -> str:
    return f"{v:.3g}"


def nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9)
    ticks = []
    k = start
    while k * step <= hi + 1e-9 * step:
        ticks.append(round(k * step, 12))
        k += 1
    return ticks


def line_plot(series: Sequence[tuple[str, Sequence[float], Sequence[float]]], title: str,
              xlabel: str, ylabel: str, notes: Sequence[str] = ()) -> str:
    """One polyline per ``(label, xs, ys)``; ``notes`` go below the legend as text."""
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    x_lo, x_hi = (min(xs_all), max(xs_all)) if xs_all else (0.0, 1.0)
    y_lo, y_hi = (min(ys_all + [0.0]), max(ys_all)) if ys_all else (0.0, 1.0)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    y_hi += 0.05 * (y_hi - y_lo)
    pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(x):
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return MARGIN_TOP + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2 - MARGIN_RIGHT / 2:.2f}" y="28" text-anchor="middle" '
        f'font-family="sans-serif" font-size="18">{escape(title)}</text>',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in nice_ticks(x_lo, x_hi):
        x = px(t)
        out.append(f'<line x1="{_num(x)}" y1="{MARGIN_TOP + ph}" x2="{_num(x)}" y2="{MARGIN_TOP + ph + 6}" stroke="black"/>')
        out.append(f'<text x="{_num(x)}" y="{MARGIN_TOP + ph + 22}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="12">{_label(t)}</text>')
    for t in nice_ticks(y_lo, y_hi):
        y = py(t)
        out.append(f'<line x1="{MARGIN_LEFT - 6}" y1="{_num(y)}" x2="{MARGIN_LEFT}" y2="{_num(y)}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_LEFT - 10}" y="{_num(y + 4)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="12">{_label(t)}</text>')
    out.append(f'<text x="{MARGIN_LEFT + pw / 2:.2f}" y="{HEIGHT - 20}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="14">{escape(xlabel)}</text>')
    out.append(f'<text x="22" y="{MARGIN_TOP + ph / 2:.2f}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="14" transform="rotate(-90 22 {MARGIN_TOP + ph / 2:.2f})">{escape(ylabel)}</text>')
    lx = MARGIN_LEFT + pw + 15
    ly = MARGIN_TOP + 10
    for k, (label, xs, ys) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{_num(px(x))},{_num(py(y))}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        y = ly + 20 * k
        out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 25}" y2="{y}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 32}" y="{y + 4}" font-family="sans-serif" font-size="12">{escape(label)}</text>')
    ny = ly + 20 * len(series) + 10
    for k, note in enumerate(notes):
        out.append(f'<text x="{lx}" y="{ny + 16 * k}" font-family="sans-serif" font-size="11" '
                   f'fill="#555555">{escape(note)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
