"""Self-contained single-series SVG figures.

One polyline with point markers on labeled axes, emitted as a complete
static document.  No scripts, no external references; identical inputs
produce identical bytes, so figures fall under the same determinism
contract as the CSV artifacts.
"""

from __future__ import annotations

import math
from html import escape

__all__ = ["line_figure"]

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 18, 22, 48


def _nice_step(span: float) -> float:
    raw = span / 5.0
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1.0, 2.0, 2.5, 5.0):
        if raw <= m * mag * (1.0 + 1e-12):
            return m * mag
    return 10.0 * mag


def _axis(lo: float, hi: float):
    # widen degenerate ranges so a single point still gets a usable scale
    if not (hi > lo):
        pad = max(abs(lo), 1.0) * 0.5
        lo, hi = lo - pad, hi + pad
    step = _nice_step(hi - lo)
    t = math.ceil(lo / step - 1e-9) * step
    ticks = []
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return lo, hi, ticks


def _fmt(v: float) -> str:
    return "%.6g" % v


def line_figure(xs, ys, xlabel: str, ylabel: str, title: str = "") -> str:
    pts = [(float(x), float(y)) for x, y in zip(xs, ys)
           if math.isfinite(x) and math.isfinite(y)]
    if pts:
        xlo, xhi, xticks = _axis(min(p[0] for p in pts),
                                 max(p[0] for p in pts))
        ylo, yhi, yticks = _axis(min(p[1] for p in pts),
                                 max(p[1] for p in pts))
    else:
        xlo, xhi, xticks = _axis(0.0, 1.0)
        ylo, yhi, yticks = _axis(0.0, 1.0)

    def px(x):
        return _ML + (x - xlo) / (xhi - xlo) * (_W - _ML - _MR)

    def py(y):
        return _H - _MB - (y - ylo) / (yhi - ylo) * (_H - _MT - _MB)

    out = ['<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
           'viewBox="0 0 %d %d">' % (_W, _H, _W, _H),
           '<rect width="%d" height="%d" fill="white"/>' % (_W, _H)]
    if title:
        out.append('<text x="%g" y="15" font-size="13" text-anchor="middle" '
                   'font-family="sans-serif">%s</text>'
                   % ((_ML + _W - _MR) / 2.0, escape(title)))
    for t in xticks:
        x = px(t)
        out.append('<line x1="%.2f" y1="%d" x2="%.2f" y2="%d" '
                   'stroke="#ccc"/>' % (x, _MT, x, _H - _MB))
        out.append('<text x="%.2f" y="%d" font-size="11" text-anchor="middle"'
                   ' font-family="sans-serif">%s</text>'
                   % (x, _H - _MB + 16, _fmt(t)))
    for t in yticks:
        y = py(t)
        out.append('<line x1="%d" y1="%.2f" x2="%d" y2="%.2f" '
                   'stroke="#ccc"/>' % (_ML, y, _W - _MR, y))
        out.append('<text x="%d" y="%.2f" font-size="11" text-anchor="end" '
                   'font-family="sans-serif">%s</text>'
                   % (_ML - 6, y + 4, _fmt(t)))
    out.append('<rect x="%d" y="%d" width="%d" height="%d" fill="none" '
               'stroke="black"/>' % (_ML, _MT, _W - _ML - _MR, _H - _MT - _MB))
    out.append('<text x="%g" y="%d" font-size="12" text-anchor="middle" '
               'font-family="sans-serif">%s</text>'
               % ((_ML + _W - _MR) / 2.0, _H - 12, escape(xlabel)))
    out.append('<text x="16" y="%g" font-size="12" text-anchor="middle" '
               'font-family="sans-serif" transform="rotate(-90 16 %g)">%s'
               '</text>' % ((_MT + _H - _MB) / 2.0, (_MT + _H - _MB) / 2.0,
                            escape(ylabel)))
    if len(pts) > 1:
        path = " ".join("%.2f,%.2f" % (px(x), py(y)) for x, y in pts)
        out.append('<polyline points="%s" fill="none" stroke="#1f77b4" '
                   'stroke-width="1.5"/>' % path)
    for x, y in pts:
        out.append('<circle cx="%.2f" cy="%.2f" r="3" fill="#1f77b4"/>'
                   % (px(x), py(y)))
    out.append("</svg>")
    return "\n".join(out) + "\n"
