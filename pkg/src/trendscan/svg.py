"""Self-contained SVG rendering of an analysis (no plotting dependencies).

Two stacked panels: the series with the posterior-mean trend and its
credibility band, and the per-ordinal change-point marginals.  Output is
a deterministic string, so re-renders are byte-identical.
"""
from __future__ import annotations

import numpy as np

__all__ = ["render_analysis_svg"]

_W, _H = 860, 560
_MARGIN = 55
_PANEL_GAP = 40
_PALETTE = ["#d95f02", "#1b9e77", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"]


def _fmt(x: float) -> str:
    return format(float(x), ".2f")


def _scale(vals, lo, hi, out_lo, out_hi):
    vals = np.asarray(vals, dtype=float)
    span = hi - lo
    if span <= 0:
        span = 1.0
    return out_lo + (vals - lo) / span * (out_hi - out_lo)


def _polyline(xs, ys, color, width="1.5", dash=None, opacity="1"):
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(xs, ys))
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{width}" opacity="{opacity}"{extra}/>')


def render_analysis_svg(times, values, dates, mean=None, lower=None,
                        upper=None, marginals=None) -> str:
    """Render series, optional fit band, and optional marginal masses."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    have_marg = marginals is not None and len(marginals) > 0
    top_h = (_H - 2 * _MARGIN - (_PANEL_GAP if have_marg else 0))
    top_h = top_h * (0.62 if have_marg else 1.0)
    x0, x1 = _MARGIN, _W - _MARGIN
    ya0, ya1 = _MARGIN, _MARGIN + top_h

    lo_v = values.min()
    hi_v = values.max()
    if lower is not None:
        lo_v = min(lo_v, np.min(lower))
        hi_v = max(hi_v, np.max(upper))
    pad = 0.05 * (hi_v - lo_v or 1.0)
    lo_v -= pad
    hi_v += pad

    X = _scale(times, times[0], times[-1], x0, x1)
    Y = _scale(values, lo_v, hi_v, ya1, ya0)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_W} {_H}" '
        f'font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{x0}" y="{ya0}" width="{x1 - x0}" height="{_fmt(ya1 - ya0)}" '
        f'fill="none" stroke="#999"/>',
    ]
    if lower is not None and upper is not None:
        Yl = _scale(lower, lo_v, hi_v, ya1, ya0)
        Yu = _scale(upper, lo_v, hi_v, ya1, ya0)
        ring = (list(zip(X, Yu)) + list(zip(X[::-1], Yl[::-1])))
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in ring)
        parts.append(f'<polygon points="{pts}" fill="#a6cee3" opacity="0.45"/>')
    parts.append(_polyline(X, Y, "#777777", width="1"))
    for x, y in zip(X, Y):
        parts.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="1.6" fill="#555"/>')
    if mean is not None:
        Ym = _scale(mean, lo_v, hi_v, ya1, ya0)
        parts.append(_polyline(X, Ym, "#000000", width="2"))
    # x tick labels: first, middle, last date
    for frac in (0.0, 0.5, 1.0):
        i = int(round(frac * (len(dates) - 1)))
        parts.append(f'<text x="{_fmt(X[i])}" y="{_fmt(ya1 + 16)}" '
                     f'text-anchor="middle" fill="#333">{dates[i]}</text>')
    for frac in (0.0, 0.5, 1.0):
        v = lo_v + frac * (hi_v - lo_v)
        y = _scale([v], lo_v, hi_v, ya1, ya0)[0]
        parts.append(f'<text x="{_fmt(x0 - 6)}" y="{_fmt(y + 4)}" '
                     f'text-anchor="end" fill="#333">{v:.3g}</text>')

    if have_marg:
        yb0 = ya1 + _PANEL_GAP
        yb1 = _H - _MARGIN
        peak = max(float(np.max(mm)) for mm in marginals) or 1.0
        parts.append(f'<rect x="{x0}" y="{_fmt(yb0)}" width="{x1 - x0}" '
                     f'height="{_fmt(yb1 - yb0)}" fill="none" stroke="#999"/>')
        for j, mm in enumerate(marginals):
            color = _PALETTE[j % len(_PALETTE)]
            Ym = _scale(mm, 0.0, 1.05 * peak, yb1, yb0)
            parts.append(_polyline(X, Ym, color, width="1.5"))
            parts.append(f'<text x="{_fmt(x0 + 8 + 92 * j)}" y="{_fmt(yb0 + 14)}" '
                         f'fill="{color}">ordinal {j + 1}</text>')
        parts.append(f'<text x="{_fmt(x0 - 6)}" y="{_fmt(yb0 + 4)}" '
                     f'text-anchor="end" fill="#333">{peak:.2g}</text>')
        parts.append(f'<text x="{_fmt(x0 - 6)}" y="{_fmt(yb1 + 4)}" '
                     f'text-anchor="end" fill="#333">0</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
