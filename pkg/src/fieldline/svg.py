"""Minimal equal-aspect SVG polyline plots of (x, y) trajectories."""

from __future__ import annotations

import math

import numpy as np

_TEMPLATE = """<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" viewBox="0 0 {w:.0f} {h:.0f}">
<title>{title}</title>
<rect x="0" y="0" width="{w:.0f}" height="{h:.0f}" fill="white"/>
<g stroke="#999999" stroke-width="0.5">
<line x1="{m:.3f}" y1="{axis_y:.3f}" x2="{xr:.3f}" y2="{axis_y:.3f}"/>
<line x1="{axis_x:.3f}" y1="{m:.3f}" x2="{axis_x:.3f}" y2="{yb:.3f}"/>
</g>
<polyline fill="none" stroke="{color}" stroke-width="{lw}" stroke-linejoin="round" points="{points}"/>
<text x="{m:.1f}" y="{label_y:.1f}" font-family="sans-serif" font-size="11">x: [{x0:.4g}, {x1:.4g}]  y: [{y0:.4g}, {y1:.4g}]</text>
</svg>
"""


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def polyline_svg(x, y, title: str = "trajectory", size: float = 480.0, margin: float = 20.0,
                 color: str = "#1f4e9c", line_width: float = 1.0) -> str:
    """SVG text of the curve (x, y); one data unit has the same length on both axes.

    Horizontal is x, vertical is y (pointing up).  The longer data extent
    fills ``size`` pixels.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    if not np.any(ok):
        raise ValueError("no finite points to plot")
    x, y = x[ok], y[ok]
    x0, x1, y0, y1 = x.min(), x.max(), y.min(), y.max()
    span = max(x1 - x0, y1 - y0)
    if span == 0:
        span = 1.0
    scale = size / span
    w = (x1 - x0) * scale + 2 * margin
    h = (y1 - y0) * scale + 2 * margin + 16
    px = margin + (x - x0) * scale
    py = margin + (y1 - y) * scale
    points = " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(px, py))
    axis_y = margin + (y1 - min(max(0.0, y0), y1)) * scale
    axis_x = margin + (min(max(0.0, x0), x1) - x0) * scale
    return _TEMPLATE.format(
        w=math.ceil(w), h=math.ceil(h), m=margin, xr=w - margin, yb=h - margin - 16,
        axis_y=axis_y, axis_x=axis_x, points=points, color=color, lw=line_width,
        title=_escape(title), label_y=h - 6, x0=x0, x1=x1, y0=y0, y1=y1)

