"""Minimal static SVG 1.1 plots: line charts, histograms and heat maps.

Output is a pure function of the data, so files are byte-reproducible.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

__all__ = ["line_plot", "histogram", "heatmap"]

_W, _H = 640, 440
_L, _R, _T, _B = 70, 20, 40, 50
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]


def _fmt(v):
    return f"{v:.2f}"


def _range(values):
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    if values.size == 0:
        return 0.0, 1.0
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        pad = abs(lo) * 0.5 or 0.5
        return lo - pad, hi + pad
    return lo, hi


class _Frame:
    def __init__(self, xr, yr):
        self.x0, self.x1 = xr
        self.y0, self.y1 = yr

    def x(self, v):
        return _L + (v - self.x0) / (self.x1 - self.x0) * (_W - _L - _R)

    def y(self, v):
        return _H - _B - (v - self.y0) / (self.y1 - self.y0) * (_H - _T - _B)


def _header(title, xlabel, ylabel, frame):
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_W}" height="{_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<polyline fill="none" stroke="black" points="{_L},{_T} {_L},{_H - _B} {_W - _R},{_H - _B}"/>',
        f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="16" y="{_H / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {_H / 2})">{escape(ylabel)}</text>',
    ]
    for v in np.linspace(frame.x0, frame.x1, 5):
        out.append(f'<text x="{_fmt(frame.x(v))}" y="{_H - _B + 16}" text-anchor="middle" '
                   f'font-size="10">{v:.3g}</text>')
    for v in np.linspace(frame.y0, frame.y1, 5):
        out.append(f'<text x="{_L - 6}" y="{_fmt(frame.y(v) + 3)}" text-anchor="end" '
                   f'font-size="10">{v:.3g}</text>')
    return out


def _write(path, lines):
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def line_plot(path, series, *, title="", xlabel="", ylabel=""):
    """Write a line chart. ``series`` is a list of ``(label, x, y)``."""
    xs = np.concatenate([np.asarray(s[1], float) for s in series]) if series else np.array([])
    ys = np.concatenate([np.asarray(s[2], float) for s in series]) if series else np.array([])
    frame = _Frame(_range(xs), _range(ys))
    lines = _header(title, xlabel, ylabel, frame)
    for k, (label, x, y) in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{_fmt(frame.x(a))},{_fmt(frame.y(b))}"
                       for a, b in zip(x, y) if np.isfinite(a) and np.isfinite(b))
        lines.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        lines.append(f'<text x="{_W - _R - 4}" y="{_T + 14 * (k + 1)}" text-anchor="end" '
                     f'font-size="11" fill="{color}">{escape(str(label))}</text>')
    _write(path, lines)


def histogram(path, edges, counts, *, title="", xlabel="", ylabel="count"):
    """Write a bar histogram from bin ``edges`` and ``counts``."""
    edges = np.asarray(edges, float)
    counts = np.asarray(counts, float)
    frame = _Frame(_range(edges), (0.0, max(float(counts.max(initial=0.0)), 1.0)))
    lines = _header(title, xlabel, ylabel, frame)
    for lo, hi, c in zip(edges[:-1], edges[1:], counts):
        x, w = frame.x(lo), frame.x(hi) - frame.x(lo)
        y = frame.y(c)
        lines.append(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" '
                     f'height="{_fmt(frame.y(0.0) - y)}" fill="{_COLORS[0]}" stroke="white"/>')
    _write(path, lines)


def heatmap(path, x, y, z, *, title="", xlabel="", ylabel=""):
    """Write a grey-scale heat map of ``z[i, j]`` over rows ``y[i]`` and columns ``x[j]``."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    z = np.asarray(z, float)
    frame = _Frame((-0.5, x.size - 0.5), (-0.5, y.size - 0.5))
    lines = _header(title, xlabel, ylabel, frame)
    zlo, zhi = _range(z)
    cw = frame.x(1.0) - frame.x(0.0)
    ch = frame.y(0.0) - frame.y(1.0)
    for i in range(y.size):
        for j in range(x.size):
            v = z[i, j]
            if not np.isfinite(v):
                continue
            level = int(round(255 * (1.0 - (v - zlo) / (zhi - zlo))))
            lines.append(f'<rect x="{_fmt(frame.x(j - 0.5))}" y="{_fmt(frame.y(i + 0.5))}" '
                         f'width="{_fmt(cw)}" height="{_fmt(ch)}" '
                         f'fill="rgb({level},{level},{level})"/>')
    _write(path, lines)
