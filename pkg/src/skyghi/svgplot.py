"""Minimal deterministic SVG charts.

Every figure the CLI emits is data-first (a CSV) plus one of these small
renderings. The writer keeps output byte-stable: no timestamps, no
library version strings, fixed float formatting.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

WIDTH, HEIGHT = 720, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 28, 44

PALETTE = ["#1f6fb2", "#d1495b", "#3d9970", "#8d6cab", "#e08f26", "#444444"]


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _limits(values) -> tuple[float, float]:
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return 0.0, 1.0
    lo, hi = min(finite), max(finite)
    if lo == hi:
        pad = abs(lo) * 0.1 or 1.0
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


class _Canvas:
    def __init__(self, x_range, y_range, title, x_label, y_label):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        ]
        if title:
            self.parts.append(
                f'<text x="{WIDTH / 2:.0f}" y="18" text-anchor="middle" '
                f'font-size="14">{title}</text>'
            )
        self._axes(x_label, y_label)

    def px(self, x: float) -> float:
        span = self.x1 - self.x0 or 1.0
        return MARGIN_L + (x - self.x0) / span * (WIDTH - MARGIN_L - MARGIN_R)

    def py(self, y: float) -> float:
        span = self.y1 - self.y0 or 1.0
        return HEIGHT - MARGIN_B - (y - self.y0) / span * (HEIGHT - MARGIN_T - MARGIN_B)

    def _ticks(self, lo, hi, n=6):
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo == hi:
            return [lo]
        raw = (hi - lo) / n
        mag = 10 ** math.floor(math.log10(raw))
        step = min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw)
        first = math.ceil(lo / step) * step
        ticks = []
        t = first
        while t <= hi + step * 1e-9:
            ticks.append(round(t, 10))
            t += step
        return ticks

    def _axes(self, x_label, y_label):
        bottom, left = HEIGHT - MARGIN_B, MARGIN_L
        self.parts.append(
            f'<line x1="{left}" y1="{bottom}" x2="{WIDTH - MARGIN_R}" y2="{bottom}" stroke="black"/>'
        )
        self.parts.append(
            f'<line x1="{left}" y1="{MARGIN_T}" x2="{left}" y2="{bottom}" stroke="black"/>'
        )
        for t in self._ticks(self.x0, self.x1):
            x = self.px(t)
            self.parts.append(f'<line x1="{_fmt(x)}" y1="{bottom}" x2="{_fmt(x)}" y2="{bottom + 5}" stroke="black"/>')
            self.parts.append(
                f'<text x="{_fmt(x)}" y="{bottom + 18}" text-anchor="middle">{t:g}</text>'
            )
        for t in self._ticks(self.y0, self.y1):
            y = self.py(t)
            self.parts.append(f'<line x1="{left - 5}" y1="{_fmt(y)}" x2="{left}" y2="{_fmt(y)}" stroke="black"/>')
            self.parts.append(
                f'<text x="{left - 8}" y="{_fmt(y + 4)}" text-anchor="end">{t:g}</text>'
            )
        if x_label:
            self.parts.append(
                f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 8}" text-anchor="middle">{x_label}</text>'
            )
        if y_label:
            self.parts.append(
                f'<text x="14" y="{HEIGHT / 2:.0f}" text-anchor="middle" '
                f'transform="rotate(-90 14 {HEIGHT / 2:.0f})">{y_label}</text>'
            )

    def polyline(self, xs, ys, color, width=1.5):
        pts = " ".join(f"{_fmt(self.px(x))},{_fmt(self.py(y))}" for x, y in zip(xs, ys))
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"/>'
        )

    def dots(self, xs, ys, color, radius=2.0):
        for x, y in zip(xs, ys):
            self.parts.append(
                f'<circle cx="{_fmt(self.px(x))}" cy="{_fmt(self.py(y))}" r="{radius}" '
                f'fill="{color}" fill-opacity="0.6"/>'
            )

    def rect(self, x_lo, x_hi, y_lo, y_hi, color, stroke="black"):
        x, y = self.px(x_lo), self.py(y_hi)
        w, h = self.px(x_hi) - self.px(x_lo), self.py(y_lo) - self.py(y_hi)
        self.parts.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" '
            f'fill="{color}" stroke="{stroke}"/>'
        )

    def hline_seg(self, x_lo, x_hi, y, color, width=1.5):
        self.parts.append(
            f'<line x1="{_fmt(self.px(x_lo))}" y1="{_fmt(self.py(y))}" '
            f'x2="{_fmt(self.px(x_hi))}" y2="{_fmt(self.py(y))}" stroke="{color}" '
            f'stroke-width="{width}"/>'
        )

    def vline_seg(self, x, y_lo, y_hi, color, width=1.0):
        self.parts.append(
            f'<line x1="{_fmt(self.px(x))}" y1="{_fmt(self.py(y_lo))}" '
            f'x2="{_fmt(self.px(x))}" y2="{_fmt(self.py(y_hi))}" stroke="{color}" '
            f'stroke-width="{width}"/>'
        )

    def legend(self, labels_colors):
        x = MARGIN_L + 10
        for i, (label, color) in enumerate(labels_colors):
            y = MARGIN_T + 14 + 16 * i
            self.parts.append(
                f'<line x1="{x}" y1="{y - 4}" x2="{x + 18}" y2="{y - 4}" '
                f'stroke="{color}" stroke-width="3"/>'
            )
            self.parts.append(f'<text x="{x + 24}" y="{y}">{label}</text>')

    def save(self, path):
        self.parts.append("</svg>")
        Path(path).write_text("\n".join(self.parts) + "\n", encoding="utf-8")


def line_chart(path, series, *, title="", x_label="", y_label="", markers=()):
    """``series`` is a list of (label, xs, ys) tuples; markers draw dots."""
    all_x = [x for _, xs, _ in series for x in xs]
    all_y = [y for _, _, ys in series for y in ys]
    canvas = _Canvas(_limits(all_x), _limits(all_y), title, x_label, y_label)
    legend = []
    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        if label in markers:
            canvas.dots(xs, ys, color)
        else:
            canvas.polyline(xs, ys, color)
        legend.append((label, color))
    if len(legend) > 1:
        canvas.legend(legend)
    canvas.save(path)


def scatter_chart(path, x, y, *, line=None, title="", x_label="", y_label=""):
    """Scatter of (x, y) points with an optional overlaid curve."""
    all_x = list(x) + (list(line[0]) if line else [])
    all_y = list(y) + (list(line[1]) if line else [])
    canvas = _Canvas(_limits(all_x), _limits(all_y), title, x_label, y_label)
    canvas.dots(x, y, PALETTE[0])
    if line:
        canvas.polyline(line[0], line[1], PALETTE[1], width=2.0)
    canvas.save(path)


def histogram_chart(path, bins: Sequence[tuple[float, float, int]], *, title="", x_label="", y_label="count"):
    """Bar chart of (lo, hi, count) bins."""
    xs = [b[0] for b in bins] + [bins[-1][1]]
    counts = [b[2] for b in bins]
    canvas = _Canvas(_limits(xs), (0.0, max(counts) * 1.05 or 1.0), title, x_label, y_label)
    for (lo, hi, count) in bins:
        canvas.rect(lo, hi, 0.0, count, PALETTE[0])
    canvas.save(path)


def box_chart(path, boxes, *, title="", x_label="", y_label=""):
    """Box plot; ``boxes`` is a list of (x, q25, median, q75, lo, hi)."""
    xs = [b[0] for b in boxes]
    ys = [v for b in boxes for v in b[1:]]
    span = (max(xs) - min(xs)) / max(len(xs) - 1, 1) if len(xs) > 1 else 1.0
    half = 0.3 * span
    canvas = _Canvas(
        (min(xs) - span, max(xs) + span), _limits(ys), title, x_label, y_label
    )
    for x, q25, med, q75, lo, hi in boxes:
        canvas.vline_seg(x, lo, q25, "black")
        canvas.vline_seg(x, q75, hi, "black")
        canvas.rect(x - half, x + half, q25, q75, "#cfe2f3")
        canvas.hline_seg(x - half, x + half, med, PALETTE[1], width=2.0)
    canvas.save(path)
