"""Static SVG scatter plots of embeddings.

Planar embeddings are drawn directly. Points on S^2 are drawn as two
orthographic discs, the hemisphere facing +z and the one facing -z (viewed
from below, so x is mirrored). Output depends only on the inputs: fixed
palette, fixed coordinate precision, no timestamps.
"""

import colorsys

import numpy as np

from .errors import DomainError

# tab20 ordering, dark shades first so small k gets well separated colors
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
    "#98df8a", "#ff9896", "#c5b0d5", "#c49c94", "#f7b6d2", "#c7c7c7",
    "#dbdb8d", "#9edae5",
)

PANEL = 420
MARGIN = 20
RADIUS = 2.2


def color_for(label):
    if label < len(PALETTE):
        return PALETTE[label]
    # golden-angle hues past the fixed palette
    h = (label * 0.618033988749895) % 1.0
    r, g, b = colorsys.hls_to_rgb(h, 0.45, 0.65)
    return "#{:02x}{:02x}{:02x}".format(round(r * 255), round(g * 255), round(b * 255))


def _circle(cx, cy, color):
    return f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{RADIUS}" fill="{color}"/>'


def _planar_panel(Y, colors, x0):
    lo = Y.min(axis=0)
    span = float((Y.max(axis=0) - lo).max())
    scale = (PANEL - 2 * MARGIN) / span if span > 0 else 0.0
    center = (PANEL - 2 * MARGIN - scale * (Y.max(axis=0) - lo)) / 2
    out = [f'<rect x="{x0 + 0.5}" y="0.5" width="{PANEL - 1}" height="{PANEL - 1}" fill="none" stroke="#999999"/>']
    for (a, b), c in zip(Y, colors):
        px = x0 + MARGIN + center[0] + scale * (a - lo[0])
        # SVG y grows downward
        py = PANEL - MARGIN - center[1] - scale * (b - lo[1])
        out.append(_circle(px, py, c))
    return out


def _disc_panel(Y, colors, x0, upper):
    r = PANEL / 2 - MARGIN
    cx = x0 + PANEL / 2
    cy = PANEL / 2
    out = [f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.2f}" fill="none" stroke="#999999"/>']
    for (a, b, z), c in zip(Y, colors):
        if (z >= 0) != upper:
            continue
        u = a if upper else -a
        out.append(_circle(cx + r * u, cy - r * b, c))
    label = "z &gt;= 0" if upper else "z &lt; 0 (from below)"
    out.append(f'<text x="{x0 + MARGIN}" y="{PANEL - 6}" font-size="12" font-family="sans-serif">{label}</text>')
    return out


def scatter_svg(Y, labels=None, title=None):
    """SVG document (str) for a 2-D or unit-norm 3-D embedding."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] == 0:
        raise DomainError("nothing to plot: embedding is empty")
    if labels is None:
        labels = np.zeros(Y.shape[0], dtype=int)
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (Y.shape[0],):
        raise DomainError("labels must have one entry per point")
    colors = [color_for(int(l)) for l in labels]

    if Y.shape[1] == 2:
        width = PANEL
        body = _planar_panel(Y, colors, 0)
    elif Y.shape[1] == 3:
        if np.max(np.abs(np.linalg.norm(Y, axis=1) - 1.0)) > 1e-6:
            raise DomainError("3-D embeddings must lie on the unit sphere")
        width = 2 * PANEL
        body = _disc_panel(Y, colors, 0, True) + _disc_panel(Y, colors, PANEL, False)
    else:
        raise DomainError(f"can only plot 2-D or 3-D embeddings, got {Y.shape[1]} columns")

    height = PANEL + (24 if title else 0)
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    if title:
        safe = title.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        head.append(f'<text x="{MARGIN}" y="{PANEL + 18}" font-size="14" font-family="sans-serif">{safe}</text>')
    return "\n".join(head + body + ["</svg>", ""])
