"""Deterministic SVG rendering of planar sample sets and certified ellipsoids."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .certificates import InvariantEllipsoid
from .errors import DimensionError
from .sampling import SampleSet
from .system import SwitchedAffineSystem, mode_fixed_point

SIZE = 480
MARGIN = 40


def _f(v: float) -> str:
    return f"{v:.3f}"


def plot_state_space(
    omega: SampleSet,
    path: str | Path | None = None,
    ell: InvariantEllipsoid | None = None,
    sys: SwitchedAffineSystem | None = None,
    R: float | None = None,
    title: str = "",
) -> str:
    """Render samples x0 on S_R, successors x1, the circle and optional ellipse.

    Returns the SVG text and writes it to ``path`` when given.
    """
    if omega.n != 2:
        raise DimensionError(f"state-space plots are planar only (n={omega.n})")
    if R is None:
        R = omega.config.R if omega.config is not None else float(np.linalg.norm(omega.x0[0]))
    pts = [np.zeros((1, 2)), omega.x0, omega.x1]
    if ell is not None:
        w = np.linalg.eigvalsh(ell.P)
        pts.append(np.full((1, 2), ell.level / math.sqrt(w[0])))
    fixed = []
    if sys is not None:
        fixed = [c for c in (mode_fixed_point(sys, i) for i in range(1, sys.M + 1)) if c is not None]
        pts += [c[None] for c in fixed]
    extent = 1.1 * max(R, float(np.max(np.abs(np.vstack(pts)))))
    scale = (SIZE / 2 - MARGIN) / extent
    cx = cy = SIZE / 2

    def X(x):
        return cx + scale * x

    def Y(y):
        return cy - scale * y

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{_f(cy)}" x2="{SIZE - MARGIN}" y2="{_f(cy)}" stroke="#999" stroke-width="0.5"/>',
        f'<line x1="{_f(cx)}" y1="{MARGIN}" x2="{_f(cx)}" y2="{SIZE - MARGIN}" stroke="#999" stroke-width="0.5"/>',
        f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(scale * R)}" fill="none" stroke="#444" '
        f'stroke-dasharray="4 3" stroke-width="1"/>',
    ]
    if ell is not None:
        w, V = np.linalg.eigh(ell.P)
        ax = [ell.level / math.sqrt(v) for v in w]
        # SVG rotates clockwise in screen coordinates; y is flipped
        angle = -math.degrees(math.atan2(V[1, 0], V[0, 0]))
        out.append(
            f'<ellipse cx="{_f(cx)}" cy="{_f(cy)}" rx="{_f(scale * ax[0])}" ry="{_f(scale * ax[1])}" '
            f'transform="rotate({_f(angle)} {_f(cx)} {_f(cy)})" fill="#2a9d8f" fill-opacity="0.2" '
            f'stroke="#2a9d8f" stroke-width="1.5"/>'
        )
    for a in omega.x0:
        out.append(f'<circle cx="{_f(X(a[0]))}" cy="{_f(Y(a[1]))}" r="2" fill="#1d3557"/>')
    for b in omega.x1:
        x, y = X(b[0]), Y(b[1])
        out.append(
            f'<path d="M{_f(x - 2.5)} {_f(y - 2.5)}L{_f(x + 2.5)} {_f(y + 2.5)}'
            f'M{_f(x - 2.5)} {_f(y + 2.5)}L{_f(x + 2.5)} {_f(y - 2.5)}" stroke="#e63946" stroke-width="1"/>'
        )
    for c in fixed:
        out.append(f'<rect x="{_f(X(c[0]) - 3)}" y="{_f(Y(c[1]) - 3)}" width="6" height="6" fill="#f4a261"/>')
    legend = [("x0 on S_R", '<circle cx="{x}" cy="{y}" r="3" fill="#1d3557"/>'),
              ("x1 observed", '<path d="M{x0} {ya}L{x1} {yb}M{x0} {yb}L{x1} {ya}" stroke="#e63946"/>'),
              (f"S_R, R={R:g}", '<line x1="{x0}" y1="{y}" x2="{x1}" y2="{y}" stroke="#444" stroke-dasharray="4 3"/>')]
    if ell is not None:
        legend.append(("invariant ellipsoid", '<rect x="{x0}" y="{ym}" width="10" height="6" fill="#2a9d8f" fill-opacity="0.5"/>'))
    if fixed:
        legend.append(("mode fixed points", '<rect x="{x0}" y="{ym}" width="6" height="6" fill="#f4a261"/>'))
    for k, (label, icon) in enumerate(legend):
        y = 16 + 14 * k
        out.append(icon.format(x=_f(14), y=_f(y), x0=_f(9), x1=_f(19), ym=_f(y - 3),
                               ya=_f(y - 4), yb=_f(y + 4)))
        out.append(f'<text x="26" y="{_f(y + 4)}" font-family="sans-serif" font-size="11">{label}</text>')
    if title:
        out.append(f'<text x="{SIZE - 10}" y="16" text-anchor="end" font-family="sans-serif" font-size="12">{title}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
