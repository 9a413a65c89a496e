"""Convex hull vertex extraction for point clouds."""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, QhullError


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def monotone_chain(points: np.ndarray) -> np.ndarray:
    """Vertices of the planar hull in counter-clockwise order (collinear points dropped)."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in pts[::-1]:
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def hull_vertices(points: np.ndarray, budget: int = 200_000) -> np.ndarray:
    """Points spanning the same convex hull as ``points``.

    Exact for n <= 2.  For n >= 3 qhull is used while the cloud fits in
    ``budget``; degenerate (flat) clouds and oversize clouds are returned
    deduplicated but otherwise unpruned.
    """
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    n = pts.shape[1]
    if n == 1:
        return np.array([pts.min(axis=0), pts.max(axis=0)]) if len(pts) > 1 else pts
    if n == 2:
        return monotone_chain(pts)
    if len(pts) <= n + 1 or len(pts) > budget:
        return pts
    try:
        return pts[ConvexHull(pts).vertices]
    except QhullError:
        return pts

