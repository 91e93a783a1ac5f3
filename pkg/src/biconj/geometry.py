"""Planar hull helpers used for domain masks, argmin hulls and diameters."""

from __future__ import annotations

import numpy as np


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def lower_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices of the lower convex hull vertices of points sorted by ``x``.

    Monotone chain; collinear middle points are dropped so consecutive hull
    slopes are strictly increasing.
    """
    hull: list[int] = []
    for k in range(len(x)):
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # (j - i) x (k - i) <= 0  means j is not strictly below segment i-k
            if (x[j] - x[i]) * (y[k] - y[i]) - (y[j] - y[i]) * (x[k] - x[i]) <= 0:
                hull.pop()
            else:
                break
        hull.append(k)
    return np.array(hull, dtype=np.intp)


def lower_hull_eval(x: np.ndarray, y: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Evaluate the lower convex envelope of (x, y) at ``q``; +inf outside [x0, x-1]."""
    q = np.asarray(q, dtype=np.float64)
    h = lower_hull(x, y)
    hx, hy = x[h], y[h]
    out = np.full(q.shape, np.inf)
    inside = (q >= hx[0]) & (q <= hx[-1])
    if len(h) == 1:
        out[inside] = hy[0]
        return out
    qi = q[inside]
    seg = np.clip(np.searchsorted(hx, qi, side="right") - 1, 0, len(h) - 2)
    t = (qi - hx[seg]) / (hx[seg + 1] - hx[seg])
    vals = hy[seg] + t * (hy[seg + 1] - hy[seg])
    # exact at vertices
    at_vertex = t == 0.0
    vals[at_vertex] = hy[seg[at_vertex]]
    out[inside] = vals
    return out


def convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """Counter-clockwise hull vertices (no collinear points) of a 2D point set."""
    pts = sorted(set(map(tuple, np.asarray(points, dtype=np.float64))))
    if len(pts) <= 2:
        return np.array(pts, dtype=np.float64).reshape(-1, 2)
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return np.array(hull, dtype=np.float64)


def hull_contains(hull: np.ndarray, q: np.ndarray, tol: float) -> np.ndarray:
    """Membership of points ``q`` (m, 2) in the hull polygon, within distance ``tol``.

    ``hull`` is the output of :func:`convex_hull_2d` and may be degenerate
    (a single point or a segment).
    """
    q = np.atleast_2d(np.asarray(q, dtype=np.float64))
    if len(hull) == 1:
        return np.linalg.norm(q - hull[0], axis=1) <= tol
    if len(hull) == 2:
        return _segment_distance(q, hull[0], hull[1]) <= tol
    inside = np.ones(len(q), dtype=bool)
    near_edge = np.zeros(len(q), dtype=bool)
    for k in range(len(hull)):
        a, b = hull[k], hull[(k + 1) % len(hull)]
        edge = b - a
        cross = edge[0] * (q[:, 1] - a[1]) - edge[1] * (q[:, 0] - a[0])
        inside &= cross >= -tol * np.linalg.norm(edge)
        near_edge |= _segment_distance(q, a, b) <= tol
    return inside | near_edge


def _segment_distance(q: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    t = np.clip(((q - a) @ ab) / (ab @ ab), 0.0, 1.0)
    return np.linalg.norm(q - (a + t[:, None] * ab), axis=1)


def in_convex_hull(points: np.ndarray, q: np.ndarray, tol: float) -> np.ndarray:
    """Membership of ``q`` in conv(points) for dimension 1 or 2, within ``tol``."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    q = np.atleast_2d(np.asarray(q, dtype=np.float64))
    if points.shape[1] == 1:
        lo, hi = points[:, 0].min(), points[:, 0].max()
        return (q[:, 0] >= lo - tol) & (q[:, 0] <= hi + tol)
    return hull_contains(convex_hull_2d(points), q, tol)


def diameter(points: np.ndarray) -> float:
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if len(points) < 2:
        return 0.0
    if points.shape[1] == 1:
        return float(points[:, 0].max() - points[:, 0].min())
    hull = convex_hull_2d(points)
    diff = hull[:, None, :] - hull[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())
