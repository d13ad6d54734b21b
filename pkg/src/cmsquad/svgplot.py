"""Minimal deterministic SVG line charts.

Every curve carries its plotted samples in ``data-x``/``data-y`` attributes
(17 significant digits) so a chart can be compared against the CSV it was
drawn from. Markers on the horizontal axis: circles for Gaussian nodes,
squares for Lobatto nodes, triangles for the nodes of a chosen canonical
representation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=64, right=20, top=36, bottom=48)
COLORS = ("#1f4e9c", "#444444", "#b8322a", "#2c7a3f", "#7a4ea3")
MARKER_SIZE = 4.0
NUMBER = re.compile(r"-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?")


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    dashed: bool = False


@dataclass
class Chart:
    title: str
    xlabel: str = "t"
    ylabel: str = ""
    series: list = field(default_factory=list)
    markers: dict = field(default_factory=dict)  # shape -> x positions
    xlim: tuple = (-1.0, 1.0)

    def add(self, label, x, y, dashed=False):
        self.series.append(Series(label, np.asarray(x, float), np.asarray(y, float), dashed))
        return self


def _g(v):
    return "nan" if not math.isfinite(v) else f"{v + 0.0:.17g}"


def _p(v):
    return f"{v:.2f}"


def nice_ticks(lo, hi, count=5):
    if not hi - lo > 1e-9 * max(1.0, abs(lo), abs(hi)):
        # flat data (or a span lost in tick rounding): pad to a unit window
        lo, hi = lo - 0.5, hi + 0.5
    raw = (hi - lo) / count
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw)
    start = math.floor(lo / step) * step
    stop = math.ceil(hi / step) * step
    k = int(round((stop - start) / step))
    return [round(start + i * step, 12) for i in range(k + 1)]


def _ylim(chart):
    ys = np.concatenate([s.y[np.isfinite(s.y)] for s in chart.series] or [np.zeros(1)])
    lo, hi = float(min(ys.min(), 0.0)), float(max(ys.max(), 0.0))
    ticks = nice_ticks(lo, hi)
    return ticks[0], ticks[-1], ticks


def _segments(x, y):
    """Split at non-finite samples so excluded points leave gaps."""
    ok = np.isfinite(y)
    runs, cur = [], []
    for i in range(len(x)):
        if ok[i]:
            cur.append(i)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    return runs


def _marker(shape, cx, cy, r=MARKER_SIZE):
    if shape == "circle":
        return f'<circle cx="{_p(cx)}" cy="{_p(cy)}" r="{_p(r)}" fill="none" stroke="black"/>'
    if shape == "square":
        return f'<rect x="{_p(cx - r)}" y="{_p(cy - r)}" width="{_p(2 * r)}" height="{_p(2 * r)}" fill="none" stroke="black"/>'
    if shape == "triangle":
        pts = f"{_p(cx)},{_p(cy - r * 1.2)} {_p(cx - r)},{_p(cy + r * 0.8)} {_p(cx + r)},{_p(cy + r * 0.8)}"
        return f'<polygon points="{pts}" fill="black" stroke="black"/>'
    raise ValueError(f"unknown marker shape {shape!r}")


def render(chart):
    x0, x1 = chart.xlim
    y0, y1, yticks = _ylim(chart)
    left, top = MARGIN["left"], MARGIN["top"]
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return left + (v - x0) / (x1 - x0) * pw

    def py(v):
        return top + (y1 - v) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<title>{escape(chart.title)}</title>',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text class="title" x="{_p(WIDTH / 2)}" y="20" text-anchor="middle">{escape(chart.title)}</text>',
        '<g class="axes" stroke="black" fill="none">',
        f'<rect x="{_p(left)}" y="{_p(top)}" width="{_p(pw)}" height="{_p(ph)}"/>',
    ]
    if y0 <= 0.0 <= y1:
        out.append(f'<line class="zero" x1="{_p(left)}" y1="{_p(py(0))}" x2="{_p(left + pw)}" y2="{_p(py(0))}" stroke="#999999"/>')
    out.append("</g>")
    out.append('<g class="ticks" fill="black">')
    for t in nice_ticks(x0, x1, 4):
        if x0 <= t <= x1:
            out.append(f'<line x1="{_p(px(t))}" y1="{_p(top + ph)}" x2="{_p(px(t))}" y2="{_p(top + ph + 5)}" stroke="black"/>')
            out.append(f'<text x="{_p(px(t))}" y="{_p(top + ph + 18)}" text-anchor="middle">{t:g}</text>')
    for t in yticks:
        out.append(f'<line x1="{_p(left - 5)}" y1="{_p(py(t))}" x2="{_p(left)}" y2="{_p(py(t))}" stroke="black"/>')
        out.append(f'<text x="{_p(left - 8)}" y="{_p(py(t) + 4)}" text-anchor="end">{t:g}</text>')
    out.append("</g>")
    out.append(f'<text class="xlabel" x="{_p(left + pw / 2)}" y="{_p(HEIGHT - 10)}" text-anchor="middle">{escape(chart.xlabel)}</text>')
    out.append(
        f'<text class="ylabel" x="16" y="{_p(top + ph / 2)}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_p(top + ph / 2)})">{escape(chart.ylabel)}</text>'
    )

    for k, s in enumerate(chart.series):
        color = COLORS[k % len(COLORS)]
        dash = ' stroke-dasharray="6 4"' if s.dashed else ""
        out.append(
            f'<g class="series" data-label="{escape(s.label)}" '
            f'data-x="{" ".join(_g(v) for v in s.x)}" data-y="{" ".join(_g(v) for v in s.y)}">'
        )
        for run in _segments(s.x, s.y):
            pts = " ".join(f"{_p(px(s.x[i]))},{_p(py(s.y[i]))}" for i in run)
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        out.append("</g>")

    base = py(0.0) if y0 <= 0.0 <= y1 else top + ph
    for shape in ("circle", "square", "triangle"):
        xs = chart.markers.get(shape)
        if xs is None or len(xs) == 0:
            continue
        out.append(f'<g class="markers" data-shape="{shape}" data-x="{" ".join(_g(v) for v in xs)}">')
        out.extend(_marker(shape, px(v), base) for v in xs)
        out.append("</g>")

    legend_y = top + 14
    for k, s in enumerate(chart.series):
        color = COLORS[k % len(COLORS)]
        y = legend_y + 16 * k
        out.append(f'<line x1="{_p(left + 10)}" y1="{_p(y - 4)}" x2="{_p(left + 34)}" y2="{_p(y - 4)}" stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{_p(left + 40)}" y="{_p(y)}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write(chart, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render(chart))


def canonical(text, decimals=6):
    """Round every number in ``text`` to ``decimals`` places, for golden-file
    comparisons that should not depend on the last few bits. Fixed decimals
    rather than significant digits, so round-off noise near zero vanishes."""

    def repl(m):
        r = f"{float(m.group(0)):.{decimals}f}".rstrip("0").rstrip(".")
        return "0" if r in ("-0", "") else r

    return NUMBER.sub(repl, text)


def series_data(text):
    """Map label -> (x, y) arrays parsed from the data attributes."""
    out = {}
    for m in re.finditer(r'<g class="series" data-label="([^"]*)" data-x="([^"]*)" data-y="([^"]*)">', text):
        out[m.group(1)] = (
            np.array([float(v) for v in m.group(2).split()]),
            np.array([float(v) for v in m.group(3).split()]),
        )
    return out


def marker_data(text):
    return {
        m.group(1): np.array([float(v) for v in m.group(2).split()])
        for m in re.finditer(r'<g class="markers" data-shape="(\w+)" data-x="([^"]*)">', text)
    }
