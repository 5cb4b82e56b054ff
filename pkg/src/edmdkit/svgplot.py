"""Self-contained SVG scatter emitter for spectrum plots.

No plotting dependency: writes a fixed 600x600 viewport with a unit-circle
guide, axis lines, and a legend.  Circle markers are meant for analytic
spectra, cross markers for sampled ones.  Output is deterministic for fixed
input data.
"""

from __future__ import annotations

import numpy as np

SIZE = 600
MARGIN = 50
HALF_RANGE = 1.6  # plot window [-1.6, 1.6]^2 comfortably contains unit circles

_COLORS = {"circle": "#1f5fbf", "cross": "#c03030"}


def _px(value):
    scale = (SIZE - 2 * MARGIN) / (2 * HALF_RANGE)
    return MARGIN + (value + HALF_RANGE) * scale


def _marker(kind, x, y, color):
    if kind == "circle":
        return (
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="6" fill="none" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
    d = 5.0
    return (
        f'<path d="M {x - d:.2f} {y - d:.2f} L {x + d:.2f} {y + d:.2f} '
        f'M {x - d:.2f} {y + d:.2f} L {x + d:.2f} {y - d:.2f}" '
        f'stroke="{color}" stroke-width="1.5"/>'
    )


def write_spectrum_svg(f, series, title="", comment=""):
    """Emit a spectrum scatter.

    ``series`` is a list of (label, eigenvalues, marker) with marker one of
    "circle" / "cross"; eigenvalues are complex arrays.
    """
    f.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
            f'viewBox="0 0 {SIZE} {SIZE}">\n')
    if comment:
        f.write(f"<!-- {comment} -->\n")
    f.write(f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>\n')
    cx = _px(0.0)
    r_unit = _px(1.0) - cx
    lo, hi = _px(-HALF_RANGE), _px(HALF_RANGE)
    f.write(f'<line x1="{lo:.2f}" y1="{cx:.2f}" x2="{hi:.2f}" y2="{cx:.2f}" '
            f'stroke="#cccccc" stroke-width="1"/>\n')
    f.write(f'<line x1="{cx:.2f}" y1="{lo:.2f}" x2="{cx:.2f}" y2="{hi:.2f}" '
            f'stroke="#cccccc" stroke-width="1"/>\n')
    f.write(f'<circle cx="{cx:.2f}" cy="{cx:.2f}" r="{r_unit:.2f}" fill="none" '
            f'stroke="#999999" stroke-width="1" stroke-dasharray="4 3"/>\n')
    if title:
        f.write(f'<text x="{SIZE / 2:.0f}" y="28" text-anchor="middle" '
                f'font-family="sans-serif" font-size="16">{title}</text>\n')
    for label, values, marker in series:
        color = _COLORS.get(marker, "#333333")
        for z in np.asarray(values, dtype=complex).reshape(-1):
            # SVG y axis points down
            f.write(_marker(marker, _px(z.real), _px(-z.imag), color) + "\n")
    # legend, top-right
    y = 50
    for label, _, marker in series:
        color = _COLORS.get(marker, "#333333")
        f.write(_marker(marker, SIZE - 150, y, color) + "\n")
        f.write(f'<text x="{SIZE - 135}" y="{y + 5}" font-family="sans-serif" '
                f'font-size="13">{label}</text>\n')
        y += 24
    f.write('<text x="570" y="318" font-family="sans-serif" font-size="12">Re</text>\n')
    f.write('<text x="306" y="45" font-family="sans-serif" font-size="12">Im</text>\n')
    f.write("</svg>\n")
