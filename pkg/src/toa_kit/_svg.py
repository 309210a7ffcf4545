"""Minimal deterministic SVG emission: line plots and heatmaps.

Hand-rolled so that identical data produces identical bytes; no plotting
library is involved.  Numbers are formatted with %.6g throughout.
"""

from __future__ import annotations

import math

_W, _H = 800, 520
_ML, _MR, _MT, _MB = 70, 30, 40, 55
_COLORS = ("#1f6fb2", "#d95f02", "#1b9e77", "#7570b3", "#e7298a", "#66a61e")


def _fmt(v: float) -> str:
    return format(float(v), ".6g")


def _bounds(values):
    lo = min(values)
    hi = max(values)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("non-finite plot data")
    if hi == lo:
        hi = lo + 1.0
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


def _ticks(lo: float, hi: float, count: int = 6):
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">',
            f'<rect width="{_W}" height="{_H}" fill="white"/>',
            f'<text x="{_W // 2}" y="24" text-anchor="middle" '
            f'font-family="monospace" font-size="15">{title}</text>',
            f'<text x="{_W // 2}" y="{_H - 12}" text-anchor="middle" '
            f'font-family="monospace" font-size="12">{xlabel}</text>',
            f'<text x="16" y="{_H // 2}" text-anchor="middle" font-family="monospace" '
            f'font-size="12" transform="rotate(-90 16 {_H // 2})">{ylabel}</text>',
        ]

    def axes(self, xlo, xhi, ylo, yhi):
        self.xlo, self.xhi, self.ylo, self.yhi = xlo, xhi, ylo, yhi
        x0, y0 = _ML, _H - _MB
        x1, y1 = _W - _MR, _MT
        self.parts.append(
            f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
            f'fill="none" stroke="black" stroke-width="1"/>'
        )
        for tx in _ticks(xlo, xhi):
            px = self.px(tx)
            self.parts.append(
                f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" y2="{y0 + 5}" stroke="black"/>'
            )
            self.parts.append(
                f'<text x="{_fmt(px)}" y="{y0 + 18}" text-anchor="middle" '
                f'font-family="monospace" font-size="10">{_fmt(tx)}</text>'
            )
        for ty in _ticks(ylo, yhi):
            py = self.py(ty)
            self.parts.append(
                f'<line x1="{x0 - 5}" y1="{_fmt(py)}" x2="{x0}" y2="{_fmt(py)}" stroke="black"/>'
            )
            self.parts.append(
                f'<text x="{x0 - 8}" y="{_fmt(py + 3)}" text-anchor="end" '
                f'font-family="monospace" font-size="10">{_fmt(ty)}</text>'
            )

    def px(self, x: float) -> float:
        return _ML + (x - self.xlo) / (self.xhi - self.xlo) * (_W - _ML - _MR)

    def py(self, y: float) -> float:
        return _H - _MB - (y - self.ylo) / (self.yhi - self.ylo) * (_H - _MT - _MB)

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def line_plot(path: str, series, title: str, xlabel: str, ylabel: str):
    """series: iterable of (label, xs, ys)."""
    series = [(str(lbl), list(map(float, xs)), list(map(float, ys))) for lbl, xs, ys in series]
    cv = _Canvas(title, xlabel, ylabel)
    xlo, xhi = _bounds([x for _, xs, _ in series for x in xs])
    ylo, yhi = _bounds([y for _, _, ys in series for y in ys])
    cv.axes(xlo, xhi, ylo, yhi)
    for i, (label, xs, ys) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{_fmt(cv.px(x))},{_fmt(cv.py(y))}" for x, y in zip(xs, ys))
        cv.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        cv.parts.append(
            f'<text x="{_W - _MR - 8}" y="{_MT + 16 + 14 * i}" text-anchor="end" '
            f'font-family="monospace" font-size="11" fill="{color}">{label}</text>'
        )
    with open(path, "w", encoding="ascii") as fh:
        fh.write(cv.render())


def _ramp(u: float) -> str:
    # dark blue -> yellow, clamped
    u = min(max(u, 0.0), 1.0)
    r = int(round(20 + 235 * u))
    g = int(round(20 + 215 * u))
    b = int(round(90 + 20 * (1.0 - u) - 70 * u))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(path: str, xs, ys, z2d, title: str, xlabel: str, ylabel: str):
    """z2d[i][j] is the value at (xs[j], ys[i])."""
    xs = list(map(float, xs))
    ys = list(map(float, ys))
    rows = [list(map(float, row)) for row in z2d]
    cv = _Canvas(title, xlabel, ylabel)
    xlo, xhi = _bounds(xs)
    ylo, yhi = _bounds(ys)
    cv.axes(xlo, xhi, ylo, yhi)
    zmax = max(max(row) for row in rows)
    zmin = min(min(row) for row in rows)
    span = (zmax - zmin) or 1.0
    cw = (_W - _ML - _MR) / max(len(xs) - 1, 1)
    ch = (_H - _MT - _MB) / max(len(ys) - 1, 1)
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            u = (rows[i][j] - zmin) / span
            px = cv.px(x) - cw / 2
            py = cv.py(y) - ch / 2
            cv.parts.append(
                f'<rect x="{_fmt(px)}" y="{_fmt(py)}" width="{_fmt(cw + 0.5)}" '
                f'height="{_fmt(ch + 0.5)}" fill="{_ramp(u)}"/>'
            )
    with open(path, "w", encoding="ascii") as fh:
        fh.write(cv.render())
