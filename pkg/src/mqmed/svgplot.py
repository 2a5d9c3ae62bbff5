"""Minimal deterministic SVG charts (stacked areas, lines, heatmaps).

Hand-rolled so output bytes depend only on the data: no library version
strings, hashed ids or timestamps end up in the files.
"""

from __future__ import annotations

import numpy as np

_PALETTE = [
    "#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee",
    "#aa3377", "#bbbbbb", "#222255", "#225555", "#553311",
]

_W, _H = 720, 440
_ML, _MR, _MT, _MB = 72, 24, 36, 52


def _fmt(x):
    return f"{x:.6g}"


def _ticks(lo, hi, n=6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** np.floor(np.log10(raw))
    for m in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = m * mag
        if step >= raw:
            break
    t0 = np.ceil(lo / step) * step
    out = []
    t = t0
    while t <= hi + 1e-12 * step:
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


class _Canvas:
    def __init__(self, title, xlabel, ylabel, xlim, ylim, comments=()):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">',
        ]
        for line in comments:
            self.parts.append(f"<!-- {line} -->")
        self.parts += [
            f'<rect width="{_W}" height="{_H}" fill="white"/>',
            f'<text x="{_W // 2}" y="22" font-family="sans-serif" font-size="15" '
            f'text-anchor="middle">{title}</text>',
        ]
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0
        self._axes(xlabel, ylabel)

    def px(self, x):
        return _ML + (x - self.x0) / (self.x1 - self.x0) * (_W - _ML - _MR)

    def py(self, y):
        return _H - _MB - (y - self.y0) / (self.y1 - self.y0) * (_H - _MT - _MB)

    def _axes(self, xlabel, ylabel):
        p = self.parts
        p.append(f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
                 f'height="{_H - _MT - _MB}" fill="none" stroke="#444"/>')
        for t in _ticks(self.x0, self.x1):
            x = self.px(t)
            p.append(f'<line x1="{_fmt(x)}" y1="{_H - _MB}" x2="{_fmt(x)}" '
                     f'y2="{_H - _MB + 5}" stroke="#444"/>')
            p.append(f'<text x="{_fmt(x)}" y="{_H - _MB + 18}" font-family="sans-serif" '
                     f'font-size="11" text-anchor="middle">{_fmt(t)}</text>')
        for t in _ticks(self.y0, self.y1):
            y = self.py(t)
            p.append(f'<line x1="{_ML - 5}" y1="{_fmt(y)}" x2="{_ML}" '
                     f'y2="{_fmt(y)}" stroke="#444"/>')
            p.append(f'<text x="{_ML - 8}" y="{_fmt(y + 4)}" font-family="sans-serif" '
                     f'font-size="11" text-anchor="end">{_fmt(t)}</text>')
        p.append(f'<text x="{_W // 2}" y="{_H - 14}" font-family="sans-serif" '
                 f'font-size="13" text-anchor="middle">{xlabel}</text>')
        p.append(f'<text x="18" y="{_H // 2}" font-family="sans-serif" font-size="13" '
                 f'text-anchor="middle" transform="rotate(-90 18 {_H // 2})">{ylabel}</text>')

    def legend(self, labels):
        x = _ML + 10
        for i, lab in enumerate(labels):
            y = _MT + 14 + 16 * i
            color = _PALETTE[i % len(_PALETTE)]
            self.parts.append(f'<rect x="{x}" y="{y - 9}" width="12" height="10" '
                              f'fill="{color}" fill-opacity="0.8"/>')
            self.parts.append(f'<text x="{x + 16}" y="{y}" font-family="sans-serif" '
                              f'font-size="11">{lab}</text>')

    def to_string(self):
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def stacked_area_svg(x, series, labels, title="", xlabel="t", ylabel="",
                     comments=()):
    """Stacked area chart; series is (n_series, n_x).

    Bands are the regions between successive partial sums, so series with
    mixed signs remain well-defined (bands may invert locally).
    """
    x = np.asarray(x, dtype=float)
    series = np.atleast_2d(np.asarray(series, dtype=float))
    cum = np.vstack([np.zeros_like(x), np.cumsum(series, axis=0)])
    ylo = min(0.0, float(cum.min()))
    yhi = float(cum.max())
    c = _Canvas(title, xlabel, ylabel, (float(x[0]), float(x[-1])), (ylo, yhi),
                comments=comments)
    for i in range(series.shape[0]):
        lower, upper = cum[i], cum[i + 1]
        pts = [f"{_fmt(c.px(xx))},{_fmt(c.py(yy))}" for xx, yy in zip(x, upper)]
        pts += [f"{_fmt(c.px(xx))},{_fmt(c.py(yy))}"
                for xx, yy in zip(x[::-1], lower[::-1])]
        color = _PALETTE[i % len(_PALETTE)]
        c.parts.append(f'<polygon points="{" ".join(pts)}" fill="{color}" '
                       f'fill-opacity="0.8" stroke="{color}" stroke-width="0.5"/>')
    c.legend(labels)
    return c.to_string()


def line_svg(x, series, labels, title="", xlabel="t", ylabel="", comments=()):
    x = np.asarray(x, dtype=float)
    series = np.atleast_2d(np.asarray(series, dtype=float))
    ylo = float(series.min())
    yhi = float(series.max())
    pad = 0.05 * (yhi - ylo + 1e-30)
    c = _Canvas(title, xlabel, ylabel, (float(x[0]), float(x[-1])),
                (ylo - pad, yhi + pad), comments=comments)
    for i in range(series.shape[0]):
        pts = " ".join(f"{_fmt(c.px(xx))},{_fmt(c.py(yy))}"
                       for xx, yy in zip(x, series[i]))
        color = _PALETTE[i % len(_PALETTE)]
        c.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                       f'stroke-width="1.5"/>')
    c.legend(labels)
    return c.to_string()


_HEAT_STOPS = np.array([
    [0.267, 0.005, 0.329],
    [0.229, 0.322, 0.546],
    [0.127, 0.566, 0.551],
    [0.369, 0.789, 0.383],
    [0.993, 0.906, 0.144],
])


def _heat_color(v):
    v = min(max(v, 0.0), 1.0)
    pos = v * (len(_HEAT_STOPS) - 1)
    i = min(int(pos), len(_HEAT_STOPS) - 2)
    frac = pos - i
    rgb = (1 - frac) * _HEAT_STOPS[i] + frac * _HEAT_STOPS[i + 1]
    return "#%02x%02x%02x" % tuple(int(round(255 * u)) for u in rgb)


def heatmap_svg(x, y, z, title="", xlabel="", ylabel="", comments=()):
    """Heatmap of z[i, j] over (y[i], x[j]) cells."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    zlo, zhi = float(z.min()), float(z.max())
    span = zhi - zlo if zhi > zlo else 1.0
    c = _Canvas(title, xlabel, ylabel, (float(x[0]), float(x[-1])),
                (float(y[0]), float(y[-1])), comments=comments)
    xe = np.concatenate([[x[0]], 0.5 * (x[1:] + x[:-1]), [x[-1]]])
    ye = np.concatenate([[y[0]], 0.5 * (y[1:] + y[:-1]), [y[-1]]])
    for i in range(y.size):
        for j in range(x.size):
            x0, x1 = c.px(xe[j]), c.px(xe[j + 1])
            y1, y0 = c.py(ye[i]), c.py(ye[i + 1])
            color = _heat_color((z[i, j] - zlo) / span)
            c.parts.append(
                f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" '
                f'height="{_fmt(y1 - y0)}" fill="{color}"/>')
    c.parts.append(f'<text x="{_W - _MR}" y="{_MT - 6}" font-family="sans-serif" '
                   f'font-size="10" text-anchor="end">range [{_fmt(zlo)}, {_fmt(zhi)}]</text>')
    return c.to_string()
