"""Measure representation of the biconjugate on a finite grid.

``f**(x) = min { sum_k w_k f(x_k) : sum_k w_k = 1, sum_k w_k x_k = x, w >= 0 }``
over the finite nodes of ``f``. The minimum is a small LP (dim + 1 rows), so an
optimal basic solution is a measure with at most dim + 1 atoms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import simplex
from .core import (
    DiscreteMeasure,
    GridSpec,
    ImproperFunction,
    SampledFunction,
    ext_dot,
    node_indices,
    pettis_expectation,
)
from .geometry import in_convex_hull
from .simplex import Infeasible


class NegativeInput(ValueError):
    """Raised when the staircase receives a negative value."""


@dataclass
class MomentLPResult:
    status: str  # "optimal" | "infeasible"
    value: float
    measure: DiscreteMeasure | None = None
    nodes: tuple[int, ...] = ()
    basis: np.ndarray | None = field(default=None, repr=False)
    # LP dual (c, s): the plane c + <s, .> supports f** at x and touches f at the atoms
    slope: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _MomentLP:
    """Columns of the moment LP for one sampled function, reused across queries."""

    def __init__(self, f: SampledFunction):
        f.require_proper()
        self.f = f
        self.cols = np.flatnonzero(f.finite)
        self.points = f.grid.points[self.cols]
        self.cost = f.values[self.cols]
        self.A = np.vstack([np.ones(len(self.cols)), self.points.T])
        self.col_of_node = np.full(f.grid.size, -1, dtype=np.intp)
        self.col_of_node[self.cols] = np.arange(len(self.cols))

    def cell_basis(self, x: np.ndarray) -> list[int] | None:
        """Columns of the grid simplex (Freudenthal split of a cell) holding ``x``."""
        grid = self.f.grid
        base, frac = [], []
        for a, xi in zip(grid.axes, x):
            t = (xi - a.lo) / a.step
            i = min(max(int(math.floor(t)), 0), a.count - 2)
            base.append(i)
            frac.append(t - i)
        order = np.argsort(-np.asarray(frac), kind="stable")
        corner = list(base)
        verts = [tuple(corner)]
        for ax in order:
            corner[ax] += 1
            verts.append(tuple(corner))
        cols = [int(self.col_of_node[grid.ravel(v)]) for v in verts]
        if min(cols) < 0:
            return None
        return cols

    def solve(self, x: Sequence[float], warm: Sequence[np.ndarray | None] = ()) -> MomentLPResult:
        """Solve at ``x``; ``warm`` lists candidate bases (e.g. from neighbouring nodes).

        The start is the feasible candidate with the lowest objective, falling
        back to the grid simplex holding ``x``, then to phase 1.
        """
        x = np.asarray(x, dtype=np.float64)
        if not self.f.grid.contains_box(x):
            return MomentLPResult("infeasible", math.inf)
        b = np.concatenate([[1.0], x])
        m = self.A.shape[0]
        start, best = None, math.inf
        for cand in (*warm, self.cell_basis(x)):
            if cand is None or len(cand) != m:
                continue
            B = self.A[:, list(cand)]
            if abs(np.linalg.det(B)) < 1e-14:
                continue
            xB = np.linalg.solve(B, b)
            if (xB >= -1e-13).all():
                obj = float(self.cost[list(cand)] @ xB)
                if obj < best:
                    start, best = cand, obj
        try:
            sol = simplex.solve(self.cost, self.A, b, basis=start)
        except Infeasible:
            return MomentLPResult("infeasible", math.inf)
        w = sol.x
        keep = np.flatnonzero(w > 1e-14)
        weights = w[keep] / w[keep].sum()
        nodes = self.cols[keep]
        mu = DiscreteMeasure(self.points[keep], weights)
        value = float(weights @ self.cost[keep])
        slope = None
        if len(sol.basis) == self.A.shape[0]:
            y = np.linalg.solve(self.A[:, sol.basis].T, self.cost[sol.basis])
            slope = y[1:]
        return MomentLPResult("optimal", value, mu, tuple(int(k) for k in nodes), sol.basis, slope)


def envelope_lp(f: SampledFunction, x: Sequence[float]) -> MomentLPResult:
    """Solve the moment LP at a query point ``x`` (any real point, not only nodes)."""
    return _MomentLP(f).solve(x)


def envelope_all(f: SampledFunction, points: np.ndarray | None = None) -> list[MomentLPResult]:
    """Moment LP at every node (or every row of ``points``), warm-starting in order."""
    lp = _MomentLP(f)
    pts = f.grid.points if points is None else np.atleast_2d(points)
    # on the full grid, the previous row's basis is a good start as well
    row = f.grid.shape[-1] if points is None and f.grid.dim == 2 else None
    out: list[MomentLPResult] = []
    for k, x in enumerate(pts):
        warm = []
        if out and out[-1].optimal:
            warm.append(out[-1].basis)
        if row is not None and k >= row and out[k - row].optimal:
            warm.append(out[k - row].basis)
        out.append(lp.solve(x, warm))
    return out


def envelope_values(f: SampledFunction) -> np.ndarray:
    return np.array([r.value for r in envelope_all(f)])


def originate(f: SampledFunction, x: Sequence[float]) -> DiscreteMeasure:
    """An optimal measure of the moment LP at ``x``."""
    res = envelope_lp(f, x)
    if not res.optimal:
        raise Infeasible(f"{tuple(x)} is outside the hull of the finite nodes")
    return res.measure


def hull_envelope_1d(f: SampledFunction) -> np.ndarray:
    """Lower convex envelope of 1D samples at every node, by monotone chain."""
    from .geometry import lower_hull_eval

    if f.grid.dim != 1:
        raise ValueError("monotone-chain envelope is 1D only")
    f.require_proper()
    x = f.grid.axes[0].nodes
    live = f.finite
    return lower_hull_eval(x[live], f.values[live], x)


# ----------------------------------------------------- originating measures


@dataclass
class AtomCheck:
    point: tuple[float, ...]
    weight: float
    f: float
    fss: float
    contact_gap: float
    affine_gap: float
    passed: bool


@dataclass
class ConcentrationReport:
    atoms: list[AtomCheck]
    passing: list[tuple[float, ...]]
    all_pass: bool


def concentration_check(
    f: SampledFunction,
    fss: SampledFunction,
    mu: DiscreteMeasure,
    x: Sequence[float],
    s: Sequence[float],
    eps: float = 1e-9,
    fss_x: float | None = None,
) -> ConcentrationReport:
    """Check that ``mu`` sits on ``{f = f**}`` and on the supporting plane of slope ``s``.

    ``fss_x`` defaults to ``fss`` at ``x``, which then must be a node.
    """
    if fss_x is None:
        fss_x = fss.at(x)
    x = np.asarray(x, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    idx = node_indices(f.grid, mu)
    atoms = []
    for k, p, w in zip(idx, mu.points, mu.weights):
        fa, fssa = f(k), fss(k)
        contact = abs(fa - fssa) if math.isfinite(fa) and math.isfinite(fssa) else math.inf
        plane = fss_x + float(s @ (p - x))
        affine = abs(fssa - plane) if math.isfinite(fssa) else math.inf
        atoms.append(
            AtomCheck(tuple(map(float, p)), float(w), fa, fssa, contact, affine,
                      contact <= eps and affine <= eps)
        )
    passing = [a.point for a in atoms if a.passed]
    return ConcentrationReport(atoms, passing, len(passing) == len(atoms))


# -------------------------------------------------- dyadic staircase (lsc)


def staircase_values(psi: np.ndarray, m: int, N: int) -> np.ndarray:
    """``sum_{n=1..N} 2^-m [psi > 2^-m n]`` evaluated in closed form."""
    psi = np.asarray(psi, dtype=np.float64)
    if (psi < 0).any():
        raise NegativeInput("staircase needs psi >= 0")
    if N < 1 or m < 0:
        raise ValueError("need m >= 0 and N >= 1")
    scale = 2.0**m
    with np.errstate(invalid="ignore"):
        # number of n >= 1 with n < 2^m psi
        count = np.where(np.isinf(psi), N, np.ceil(psi * scale) - 1)
    count = np.clip(count, 0, N)
    return count / scale


def staircase(psi: SampledFunction, m: int, N: int) -> SampledFunction:
    return psi.with_values(staircase_values(psi.values, m, N))


@dataclass
class LiminfReport:
    integrals: list[float]
    tail_inf: list[float]
    liminf: float
    limit_integral: float
    holds: bool


def lsc_liminf_demo(
    psi: SampledFunction, mus: Sequence[DiscreteMeasure], mu: DiscreteMeasure, tol: float = 1e-12
) -> LiminfReport:
    """Compare ``liminf ∫psi dmu_n`` with ``∫psi dmu`` along a finite sequence.

    The liminf of the finite sequence is read off as the infimum over its
    second half.
    """
    if (psi.values < 0).any():
        raise NegativeInput("psi must be nonnegative")
    if not mus:
        raise ValueError("empty measure sequence")
    integrals = [m.integrate(psi) for m in mus]
    tail = list(np.minimum.accumulate(np.array(integrals)[::-1])[::-1])
    liminf = float(min(integrals[len(integrals) // 2 :]))
    target = mu.integrate(psi)
    return LiminfReport(integrals, [float(t) for t in tail], liminf, target, liminf >= target - tol)


# ------------------------------------------------------------ argmin hulls


@dataclass
class HullReport:
    min_f: float
    min_fss: float
    argmin_f: list[int]
    argmin_fss: list[int]
    hull_nodes: list[int]
    minima_agree: bool
    sets_agree: bool

    @property
    def passed(self) -> bool:
        return self.minima_agree and self.sets_agree


def minimizer_hull_check(f: SampledFunction, fss: SampledFunction, rel: float = 1e-9) -> HullReport:
    """Compare argmin f** with the grid nodes in the convex hull of argmin f."""
    f.require_proper()
    mf, mss = f.min(), fss.min()
    eps_f = rel * (1.0 + abs(mf))
    eps_ss = rel * (1.0 + abs(mss))
    M_f = np.flatnonzero(f.values <= mf + eps_f)
    M_ss = np.flatnonzero(fss.values <= mss + eps_ss)
    pts = f.grid.points
    inside = in_convex_hull(pts[M_f], pts, 0.5 * f.grid.h)
    hull_nodes = np.flatnonzero(inside)
    return HullReport(
        mf,
        mss,
        M_f.tolist(),
        M_ss.tolist(),
        hull_nodes.tolist(),
        abs(mf - mss) <= max(eps_f, eps_ss),
        np.array_equal(hull_nodes, M_ss),
    )
