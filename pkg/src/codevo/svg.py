"""Minimal self-contained SVG 1.1 figures: scatter plots and inverse
grayscale heatmaps. Output is deterministic for equal input."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

HEADER = '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
FONT = "font-family:sans-serif;font-size:11px"


def _f(v: float) -> str:
    return f"{v:.2f}"


def _svg(width: float, height: float, body: list[str]) -> str:
    return (
        HEADER
        + f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}">\n'
        + f'<rect x="0" y="0" width="{_f(width)}" height="{_f(height)}" style="fill:#ffffff"/>\n'
        + "\n".join(body)
        + "\n</svg>\n"
    )


def _text(x, y, s, anchor="start", extra=""):
    return f'<text x="{_f(x)}" y="{_f(y)}" style="{FONT};text-anchor:{anchor}{extra}">{escape(s)}</text>'


def grey(p: float) -> str:
    """Inverse grayscale: probability 0 is white, 1 is black."""
    level = int(round(255 * (1.0 - min(max(p, 0.0), 1.0))))
    return f"#{level:02x}{level:02x}{level:02x}"


def scatter(
    groups: Sequence[tuple[str, np.ndarray, str, str]],
    title: str = "",
    size: float = 420.0,
) -> str:
    """Scatter plot of several point groups.

    Each group is (label, points of shape (k, 2), marker, colour) with
    marker "circle" or "diamond".
    """
    margin = 40.0
    pts = [np.asarray(p, dtype=float).reshape(-1, 2) for _, p, _, _ in groups]
    allp = np.vstack(pts) if pts else np.zeros((1, 2))
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = float(max((hi - lo).max(), 1e-9))
    centre = 0.5 * (lo + hi)
    scale = (size - 2 * margin) / span

    def xy(p):
        return (size / 2 + (p[0] - centre[0]) * scale, size / 2 - (p[1] - centre[1]) * scale)

    body = [f'<rect x="{_f(margin)}" y="{_f(margin)}" width="{_f(size - 2 * margin)}" '
            f'height="{_f(size - 2 * margin)}" style="fill:none;stroke:#999999;stroke-width:1"/>']
    if title:
        body.append(_text(size / 2, 20, title, "middle"))
    for (label, _, marker, colour), points in zip(groups, pts):
        for p in points:
            x, y = xy(p)
            if marker == "diamond":
                d = 5.0
                body.append(
                    f'<polygon points="{_f(x)},{_f(y - d)} {_f(x + d)},{_f(y)} {_f(x)},{_f(y + d)} {_f(x - d)},{_f(y)}" '
                    f'style="fill:{colour};fill-opacity:0.7;stroke:#000000;stroke-width:0.5"/>'
                )
            else:
                body.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="4.00" '
                            f'style="fill:{colour};fill-opacity:0.7;stroke:#000000;stroke-width:0.5"/>')
    for k, (label, _, marker, colour) in enumerate(groups):
        y = size - 12 - 14 * (len(groups) - 1 - k)
        body.append(f'<rect x="{_f(margin)}" y="{_f(y - 8)}" width="8.00" height="8.00" style="fill:{colour}"/>')
        body.append(_text(margin + 12, y, f"{label} ({marker})"))
    return _svg(size, size, body)


def heatmap_panels(
    panels: Sequence[tuple[str, np.ndarray]],
    row_label: str = "y",
    col_label: str = "x",
    cell: float = 18.0,
    columns: int = 4,
) -> str:
    """Grid of heatmaps, one per (caption, matrix) panel, values in [0, 1]."""
    if not panels:
        return _svg(100, 40, [_text(10, 24, "(empty)")])
    max_r = max(np.asarray(m).shape[0] for _, m in panels)
    max_c = max(np.asarray(m).shape[1] for _, m in panels)
    pw, ph = max_c * cell + 40, max_r * cell + 46
    ncol = min(columns, len(panels))
    nrow = -(-len(panels) // ncol)
    body = []
    for k, (caption, m) in enumerate(panels):
        m = np.asarray(m, dtype=float)
        ox = (k % ncol) * pw + 28
        oy = (k // ncol) * ph + 22
        body.append(_text(ox, oy - 6, caption))
        for i in range(m.shape[0]):
            body.append(_text(ox - 4, oy + (i + 0.7) * cell, f"{row_label}{i + 1}", "end", ";font-size:9px"))
            for j in range(m.shape[1]):
                body.append(
                    f'<rect x="{_f(ox + j * cell)}" y="{_f(oy + i * cell)}" width="{_f(cell)}" height="{_f(cell)}" '
                    f'style="fill:{grey(m[i, j])};stroke:#cccccc;stroke-width:0.5"/>'
                )
        for j in range(m.shape[1]):
            body.append(_text(ox + (j + 0.5) * cell, oy + m.shape[0] * cell + 11,
                              f"{col_label}{j + 1}", "middle", ";font-size:9px"))
    return _svg(ncol * pw + 10, nrow * ph + 10, body)
