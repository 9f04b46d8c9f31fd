"""A small log-log SVG plot writer (axes, markers, fitted lines)."""

from __future__ import annotations

from math import floor, ceil, log10
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["loglog_svg"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def loglog_svg(series, title: str = "", xlabel: str = "k", ylabel: str = "residual",
               width: int = 520, height: int = 380) -> str:
    """Render ``series`` = iterable of ``(label, xs, ys, slope, intercept)``.

    ``slope``/``intercept`` may be ``None``; otherwise the line
    ``log y = slope log x + intercept`` is drawn over the data range.
    Non-positive values are skipped.
    """
    pts = [(lab, np.asarray(x, float), np.asarray(y, float), s, b) for lab, x, y, s, b in series]
    xs = np.concatenate([p[1][p[2] > 0] for p in pts]) if pts else np.array([])
    ys = np.concatenate([p[2][p[2] > 0] for p in pts]) if pts else np.array([])
    m = dict(l=70, r=20, t=30, b=50)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="18" text-anchor="middle">{escape(title)}</text>')
    if xs.size == 0:
        out.append(f'<text x="{width / 2:.1f}" y="{height / 2:.1f}" text-anchor="middle">'
                   'no positive data</text></svg>')
        return "\n".join(out) + "\n"
    x0, x1 = floor(log10(xs.min())), ceil(log10(xs.max()))
    y0, y1 = floor(log10(ys.min())), ceil(log10(ys.max()))
    x1, y1 = max(x1, x0 + 1), max(y1, y0 + 1)
    pw, ph = width - m["l"] - m["r"], height - m["t"] - m["b"]

    def X(v):
        return m["l"] + (log10(v) - x0) / (x1 - x0) * pw

    def Y(v):
        return m["t"] + (y1 - log10(v)) / (y1 - y0) * ph

    out.append(f'<rect x="{m["l"]}" y="{m["t"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for e in range(x0, x1 + 1):
        px = X(10.0 ** e)
        out.append(f'<line x1="{px:.1f}" y1="{m["t"] + ph}" x2="{px:.1f}" y2="{m["t"] + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{px:.1f}" y="{m["t"] + ph + 16}" text-anchor="middle">1e{e}</text>')
    for e in range(y0, y1 + 1):
        py = Y(10.0 ** e)
        out.append(f'<line x1="{m["l"] - 4}" y1="{py:.1f}" x2="{m["l"]}" y2="{py:.1f}" stroke="black"/>')
        out.append(f'<text x="{m["l"] - 6}" y="{py + 4:.1f}" text-anchor="end">1e{e}</text>')
    out.append(f'<text x="{m["l"] + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{m["t"] + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {m["t"] + ph / 2:.1f})">{escape(ylabel)}</text>')
    for i, (lab, x, y, s, b) in enumerate(pts):
        c = _COLORS[i % len(_COLORS)]
        ok = y > 0
        for xv, yv in zip(x[ok], y[ok]):
            out.append(f'<circle cx="{X(xv):.1f}" cy="{Y(yv):.1f}" r="3" fill="{c}"/>')
        if s is not None and b is not None and np.isfinite(s) and ok.any():
            xa, xb = x[ok].min(), x[ok].max()
            ya, yb = np.exp(b) * xa ** s, np.exp(b) * xb ** s
            out.append(f'<line x1="{X(xa):.1f}" y1="{Y(ya):.1f}" x2="{X(xb):.1f}" y2="{Y(yb):.1f}" '
                       f'stroke="{c}" stroke-dasharray="4 3"/>')
        slope = "" if s is None or not np.isfinite(s) else f" (slope {s:.2f})"
        out.append(f'<text x="{m["l"] + 8}" y="{m["t"] + 14 + 14 * i}" fill="{c}">'
                   f'{escape(lab + slope)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
