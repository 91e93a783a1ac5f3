"""Discrete Legendre-Fenchel conjugation on uniform grids.

Brute-force enumeration is the reference definition of the conjugate. The
``fast`` method builds the lower hull of each line once and assigns every
slope to its supporting hull vertex by binary search; in 2D the transform is
applied axis by axis, which is exact because the max over a product grid
splits into nested maxima.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .core import Axis, DualGridSpec, GridSpec, SampledFunction
from .geometry import in_convex_hull, lower_hull

DEFAULT_PAD = 0.25
REL_FY = 1e-9


# ---------------------------------------------------------------- 1D kernels


def conj_line_brute(x: np.ndarray, f: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``max_i s*x[i] - f[i]`` for every slope; returns (values, argmax).

    Lines with no finite value give ``-inf`` and argmax ``-1``.
    """
    live = np.isfinite(f)
    if not live.any():
        return np.full(s.shape, -np.inf), np.full(s.shape, -1, dtype=np.intp)
    idx = np.flatnonzero(live)
    vals = np.multiply.outer(s, x[idx]) - f[idx]
    k = vals.argmax(axis=1)
    return vals[np.arange(len(s)), k], idx[k]


def conj_line_fast(x: np.ndarray, f: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Same contract as :func:`conj_line_brute`, in O((n + m) log n)."""
    live = np.isfinite(f)
    if not live.any():
        return np.full(s.shape, -np.inf), np.full(s.shape, -1, dtype=np.intp)
    idx = np.flatnonzero(live)
    xv, fv = x[idx], f[idx]
    h = lower_hull(xv, fv)
    slopes = np.diff(fv[h]) / np.diff(xv[h])
    k = h[np.searchsorted(slopes, s, side="left")]
    return s * xv[k] - fv[k], idx[k]


_KERNELS = {"fast": conj_line_fast, "brute": conj_line_brute}


# ------------------------------------------------------------ grid transform


def _conj_grid(
    grid: GridSpec, values: np.ndarray, dual: GridSpec, method: str
) -> tuple[np.ndarray, np.ndarray]:
    """Conjugate values on ``dual`` plus flat argmax indices into ``grid``."""
    if grid.dim != dual.dim:
        raise ValueError(f"primal dim {grid.dim} != dual dim {dual.dim}")
    if method == "brute":
        return _conj_grid_brute(grid, values, dual)
    kernel = _KERNELS[method]
    if grid.dim == 1:
        return kernel(grid.axes[0].nodes, values, dual.axes[0].nodes)

    n1, n2 = grid.shape
    c1, c2 = dual.shape
    x1, x2 = (a.nodes for a in grid.axes)
    s1, s2 = (a.nodes for a in dual.axes)
    F = values.reshape(n1, n2)
    # inner pass over axis 2: phi(i1, j2) = min_i2 f - s2*x2
    phi = np.empty((n1, c2))
    arg2 = np.empty((n1, c2), dtype=np.intp)
    for i1 in range(n1):
        g, a = kernel(x2, F[i1], s2)
        phi[i1] = -g
        arg2[i1] = a
    # outer pass over axis 1
    out = np.empty((c1, c2))
    arg = np.empty((c1, c2), dtype=np.intp)
    for j2 in range(c2):
        g, a1 = kernel(x1, phi[:, j2], s1)
        out[:, j2] = g
        arg[:, j2] = a1 * n2 + arg2[a1, j2]
    return out.ravel(), arg.ravel()


def _conj_grid_brute(grid: GridSpec, values: np.ndarray, dual: GridSpec, chunk: int = 512):
    live = np.flatnonzero(np.isfinite(values))
    X = grid.points[live]
    fv = values[live]
    S = dual.points
    out = np.empty(len(S))
    arg = np.empty(len(S), dtype=np.intp)
    for start in range(0, len(S), chunk):
        block = S[start : start + chunk] @ X.T - fv
        k = block.argmax(axis=1)
        out[start : start + chunk] = block[np.arange(len(k)), k]
        arg[start : start + chunk] = live[k]
    return out, arg


def conjugate(f: SampledFunction, dual: DualGridSpec, method: str = "fast") -> SampledFunction:
    """``f*(s) = max_x <s, x> - f(x)`` over the finite nodes of ``f``, on ``dual``."""
    f.require_proper()
    vals, _ = _conj_grid(f.grid, f.values, dual, method)
    return SampledFunction(dual, vals)


def conjugate_argmax(f: SampledFunction, dual: DualGridSpec, method: str = "fast"):
    """Conjugate together with one maximizing primal node per dual node."""
    f.require_proper()
    vals, arg = _conj_grid(f.grid, f.values, dual, method)
    return SampledFunction(dual, vals), arg


def domain_hull_mask(f: SampledFunction) -> np.ndarray:
    """Nodes lying in the convex hull of the finite nodes of ``f``."""
    pts = f.grid.points
    tol = 1e-9 * f.grid.h
    return in_convex_hull(pts[f.finite], pts, tol)


def biconjugate(f: SampledFunction, dual: DualGridSpec, method: str = "fast") -> SampledFunction:
    """``conjugate(conjugate(f, dual), grid)``, set to +inf off conv(dom f).

    The masking restores the value a dual space without bounds would produce
    outside the hull of the effective domain.
    """
    fstar = conjugate(f, dual, method)
    vals, _ = _conj_grid(dual, fstar.values, f.grid, method)
    vals = np.where(domain_hull_mask(f), vals, np.inf)
    return SampledFunction(f.grid, vals)


def fy_tolerance(fx: float, fs: float, rel: float = REL_FY) -> float:
    return rel * (1.0 + abs(fx) + abs(fs))


def fenchel_young_gap(f: SampledFunction, fstar: SampledFunction, x: int, s: int) -> float:
    """``f(x) + f*(s) - <s, x>`` for node index ``x`` and dual node index ``s``."""
    fx = f(x)
    if math.isinf(fx):
        return math.inf
    xs = np.asarray(f.grid.node(x))
    ss = np.asarray(fstar.grid.node(s))
    return fx + fstar(s) - float(ss @ xs)


def subdifferentiable(g: SampledFunction, dual: DualGridSpec, rel: float = REL_FY) -> np.ndarray:
    """Primal nodes where some dual node has a relative Fenchel-Young gap <= ``rel``.

    Uses ``min_s gap - tol = g - rel(1+|g|) - h*(x)`` with ``h = g* - rel|g*|``,
    so the scan over all (x, s) pairs costs two transforms.
    """
    gstar = conjugate(g, dual).values
    h = gstar - rel * np.abs(gstar)
    hstar, _ = _conj_grid(dual, h, g.grid, "fast")
    with np.errstate(invalid="ignore"):
        slack = g.values - rel * (1.0 + np.abs(g.values)) - hstar
    return np.isfinite(g.values) & (slack <= 0)


def dom_subdiff_conjugate(f: SampledFunction, dual: DualGridSpec, eps_fy: float = REL_FY) -> set[int]:
    """Dual nodes ``s`` with some primal node in ``∂f*(s)`` (gap of f**, f* within ``eps_fy``)."""
    f.require_proper()
    fstar = conjugate(f, dual).values
    fss = biconjugate(f, dual).values
    with np.errstate(invalid="ignore"):
        h = fss - eps_fy * np.abs(fss)
    hstar, _ = _conj_grid(f.grid, h, dual, "fast")
    slack = fstar - eps_fy * (1.0 + np.abs(fstar)) - hstar
    return set(np.flatnonzero(slack <= 0).tolist())


# -------------------------------------------------------------- dual ranges


def slope_bounds(f: SampledFunction) -> tuple[float, ...]:
    """Per axis, the largest difference quotient between consecutive finite nodes of a line."""
    out = []
    arr = f.array
    for axis, step in enumerate(f.grid.steps):
        lines = np.moveaxis(arr, axis, -1).reshape(-1, arr.shape[axis])
        best = 0.0
        for line in lines:
            idx = np.flatnonzero(np.isfinite(line))
            if idx.size > 1:
                q = np.abs(np.diff(line[idx])) / (np.diff(idx) * step)
                best = max(best, float(q.max()))
        out.append(best)
    return tuple(out)


def default_dual_count(axis: Axis, bound: float, pad: float = DEFAULT_PAD) -> int:
    """Dual nodes for one axis: spacing at most the primal spacing and 4x refinement.

    The biconjugate is exact at a hull vertex only when some dual node falls in
    its subdifferential, whose width is of order (curvature * spacing), and on
    a hull edge only when the edge slope itself is a node. The cell count is
    even, so slope 0 is a node, and when ``8 * (1 + pad)`` is an integer it is
    also a multiple of that, which puts every quarter of the largest observed
    slope ``M = bound / (1 + pad)`` (0, M/4, ..., M) on the grid.
    """
    cells = max(4 * (axis.count - 1), math.ceil(2 * bound / axis.step))
    ratio = 8 * (1 + pad)
    unit = 2
    if abs(ratio - round(ratio)) < 1e-9:
        unit = math.lcm(2, round(ratio))
    cells = -(-cells // unit) * unit
    return cells + 1


def auto_dual_grid(
    f: SampledFunction, count: int | Sequence[int] | None = None, pad: float = DEFAULT_PAD
) -> DualGridSpec:
    """Symmetric slope grid ``[-L, L]`` per axis, ``L = (1 + pad) * max slope``.

    ``L`` falls back to 1 when an axis shows no nonzero finite slope.
    """
    f.require_proper()
    if pad < 0:
        raise ValueError("pad must be nonnegative")
    bounds = [(1.0 + pad) * b if b > 0 else 1.0 for b in slope_bounds(f)]
    if count is None:
        counts = [default_dual_count(a, L, pad) for a, L in zip(f.grid.axes, bounds)]
    elif isinstance(count, int):
        counts = [count] * f.grid.dim
    else:
        counts = list(count)
    if any(c < 2 for c in counts):
        raise ValueError("dual count must be at least 2")
    return GridSpec(tuple(Axis(-L, L, c) for L, c in zip(bounds, counts)))
