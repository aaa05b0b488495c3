"""Minimal static SVG line charts drawn straight from CSV text."""

from __future__ import annotations

import csv
import io
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=70, right=20, top=40, bottom=55)
COLOURS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def read_columns(csv_text: str) -> dict[str, np.ndarray]:
    """Numeric columns of a CSV (lines starting with ``#`` are skipped)."""
    rows = [r for r in csv.reader(io.StringIO(csv_text)) if r and not r[0].startswith("#")]
    header, body = rows[0], rows[1:]
    cols = {}
    for j, name in enumerate(header):
        vals = []
        for r in body:
            try:
                vals.append(float(r[j]))
            except (ValueError, IndexError):
                vals.append(np.nan)
        cols[name] = np.array(vals)
    return cols


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    return np.arange(np.ceil(lo / step) * step, hi + 0.5 * step, step)


def line_chart(
    csv_text: str,
    x: str,
    ys: Sequence[str],
    title: str = "",
    xlabel: str | None = None,
    ylabel: str = "",
    markers: bool = False,
) -> str:
    cols = read_columns(csv_text)
    xv = cols[x]
    series = [(name, cols[name]) for name in ys]
    finite = np.concatenate([v[np.isfinite(v)] for _, v in series] or [np.zeros(1)])
    x0, x1 = float(np.nanmin(xv)), float(np.nanmax(xv))
    y0, y1 = min(0.0, float(finite.min())), max(1.0, float(finite.max()))
    if x1 == x0:
        x1 = x0 + 1.0
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN["top"] + (1 - (v - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        if x0 <= t <= x1:
            out.append(f'<line x1="{px(t):.2f}" y1="{MARGIN["top"] + ph}" x2="{px(t):.2f}" '
                       f'y2="{MARGIN["top"] + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{px(t):.2f}" y="{MARGIN["top"] + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        if y0 <= t <= y1:
            out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{py(t):.2f}" x2="{MARGIN["left"]}" '
                       f'y2="{py(t):.2f}" stroke="black"/>')
            out.append(f'<text x="{MARGIN["left"] - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    for k, (name, yv) in enumerate(series):
        colour = COLOURS[k % len(COLOURS)]
        ok = np.isfinite(xv) & np.isfinite(yv)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xv[ok], yv[ok]))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1.5"/>')
        if markers:
            out.extend(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3" fill="{colour}"/>'
                       for a, b in zip(xv[ok], yv[ok]))
        ly = MARGIN["top"] + 16 + 16 * k
        lx = MARGIN["left"] + pw - 150
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly}">{escape(name)}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2}" y="{HEIGHT - 12}" text-anchor="middle">'
               f'{escape(xlabel or x)}</text>')
    out.append(f'<text x="16" y="{MARGIN["top"] + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MARGIN["top"] + ph / 2})">{escape(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
