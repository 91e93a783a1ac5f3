"""Tilted uniqueness versus essential strict convexity, decided on a grid.

Condition (i): for every dual node ``s`` the near-minimizers of ``f - <s, .>``
fit in a set of diameter at most ``kappa * h``.
Condition (ii): ``f**`` has no affine midpoint triple at a subdifferentiable
node, and ``f = f**`` at every subdifferentiable node.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from .core import DualGridSpec, GridSpec, SampledFunction
from .geometry import diameter
from .transform import REL_FY, biconjugate, conjugate, subdifferentiable


class NotConvex(ValueError):
    """Raised when a function expected to be convex violates the midpoint inequality."""


@dataclass(frozen=True)
class Tolerances:
    rel_val: float = 1e-9
    rel_fy: float = REL_FY
    rel_aff: float = 1e-9
    kappa: float = 1.5

    def __post_init__(self):
        if min(self.rel_val, self.rel_fy, self.rel_aff) <= 0:
            raise ValueError("tolerances must be positive")
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")


def value_tol(m, rel: float):
    return rel * (1.0 + np.abs(m))


# ----------------------------------------------------------- single tilts


@dataclass
class TiltResult:
    dual_node: tuple[float, ...]
    min_value: float
    minimizer_nodes: tuple[int, ...]
    cluster_count: int
    diameter: float


def cluster_count(grid: GridSpec, nodes: Sequence[int]) -> int:
    """Connected components of ``nodes`` under grid adjacency (king moves in 2D)."""
    nodes = np.asarray(nodes, dtype=np.intp)
    if nodes.size <= 1:
        return int(nodes.size)
    multi = np.array(np.unravel_index(nodes, grid.shape)).T
    lo = multi.min(0)
    box = np.zeros(tuple(multi.max(0) - lo + 1), dtype=bool)
    box[tuple((multi - lo).T)] = True
    _, count = ndimage.label(box, structure=np.ones((3,) * grid.dim, dtype=bool))
    return int(count)


def _tilt_result(f: SampledFunction, s: Sequence[float], m: float, nodes: np.ndarray) -> TiltResult:
    pts = f.grid.points[nodes]
    return TiltResult(
        tuple(float(v) for v in s),
        float(m),
        tuple(int(k) for k in nodes),
        cluster_count(f.grid, nodes),
        diameter(pts),
    )


def _tilted_values(f: SampledFunction, s: Sequence[float]) -> np.ndarray:
    # same summation order as the scan engine: (f - s_last x_last) - ... - s_1 x_1
    vals = f.values.copy()
    pts = f.grid.points
    for ax in reversed(range(f.grid.dim)):
        vals = vals - s[ax] * pts[:, ax]
    return vals


def tilted_argmin(f: SampledFunction, s: Sequence[float], rel_val: float = 1e-9) -> TiltResult:
    """Enumerate ``f(x) - <s, x>`` and collect nodes within ``rel_val (1 + |min|)`` of the min."""
    f.require_proper()
    vals = _tilted_values(f, s)
    m = float(vals.min())
    nodes = np.flatnonzero(vals <= m + value_tol(m, rel_val))
    return _tilt_result(f, s, m, nodes)


# ------------------------------------------------------------ scan engine


@dataclass
class TiltSets:
    """Near-argmin sets of ``f - <s, .>`` for every node ``s`` of a dual grid.

    ``single[j]`` is the unique near-minimizer when there is exactly one,
    otherwise -1 and the set sits in ``multi[j]``.
    """

    dual: GridSpec
    min_values: np.ndarray
    single: np.ndarray
    multi: dict[int, np.ndarray]

    def nodes(self, j: int) -> np.ndarray:
        if self.single[j] >= 0:
            return np.array([self.single[j]])
        return self.multi[j]


Slack = Callable[[np.ndarray], np.ndarray]


def tilt_sets(f: SampledFunction, dual: DualGridSpec, slack: Slack, method: str = "fast") -> TiltSets:
    """Sets ``{x : f(x) - <s, x> <= m(s) + slack(m(s))}`` for every dual node.

    ``method="brute"`` enumerates every (s, x) pair. ``"fast"`` is the same in
    1D; in 2D it locates one minimizer per slope with two nested passes,
    enumerates a disk of radius 1.5 h around it, and tests the rest of the grid
    through prefix/suffix minima. Slopes that have a near-minimizer outside the
    disk fall back to enumeration, so the sets are exact either way.
    """
    f.require_proper()
    if f.grid.dim != dual.dim:
        raise ValueError("primal and dual dimensions differ")
    if method == "brute" or f.grid.dim == 1:
        return _tilt_sets_brute(f, dual, slack)
    return _tilt_sets_2d(f, dual, slack)


def _pack(dual, m, sets):
    single = np.full(len(m), -1, dtype=np.intp)
    multi = {}
    for j, nodes in enumerate(sets):
        if len(nodes) == 1:
            single[j] = nodes[0]
        else:
            multi[j] = nodes
    return TiltSets(dual, m, single, multi)


def _tilt_sets_brute(f, dual, slack, chunk=256):
    S = dual.points
    m_all = np.empty(len(S))
    sets = []
    pts = f.grid.points
    for start in range(0, len(S), chunk):
        block = S[start : start + chunk]
        vals = np.broadcast_to(f.values, (len(block), f.grid.size)).copy()
        for ax in reversed(range(f.grid.dim)):
            vals -= block[:, ax : ax + 1] * pts[:, ax]
        m = vals.min(axis=1)
        m_all[start : start + chunk] = m
        mask = vals <= (m + slack(m))[:, None]
        sets.extend(np.flatnonzero(row) for row in mask)
    return _pack(dual, m_all, sets)


def _tilt_sets_2d(f, dual, slack):
    grid = f.grid
    n1, n2 = grid.shape
    c1, c2 = dual.shape
    x1, x2 = (a.nodes for a in grid.axes)
    s1, s2 = (a.nodes for a in dual.axes)
    F = f.array
    rho = 1.5 * grid.h
    h1, h2 = grid.steps
    r1 = int(math.floor(rho / h1 + 1e-9))
    r2 = int(math.floor(rho / h2 + 1e-9))
    offsets = [(d1, d2) for d1 in range(-r1, r1 + 1) for d2 in range(-r2, r2 + 1)]
    in_disk = [math.hypot(d1 * h1, d2 * h2) <= rho * (1 + 1e-12) for d1, d2 in offsets]

    m_all = np.empty((c1, c2))
    single = np.full((c1, c2), -1, dtype=np.intp)
    multi: dict[int, np.ndarray] = {}
    cols = np.arange(c1)
    inf_col = np.full((n1, 1), np.inf)
    inf_row = np.full((1, c1), np.inf)

    for j2 in range(c2):
        V = F - s2[j2] * x2
        phi = V.min(axis=1)
        a2 = V.argmin(axis=1)
        # PV[:, k] = min over columns < k, SV[:, k] = min over columns >= k
        PV = np.hstack([inf_col, np.minimum.accumulate(V, axis=1)])
        SV = np.hstack([np.minimum.accumulate(V[:, ::-1], axis=1)[:, ::-1], inf_col])

        W = phi[:, None] - x1[:, None] * s1[None, :]
        i1 = W.argmin(axis=0)
        m = W[i1, cols]
        T = m + slack(m)
        PW = np.vstack([inf_row, np.minimum.accumulate(W, axis=0)])
        SW = np.vstack([np.minimum.accumulate(W[::-1], axis=0)[::-1], inf_row])

        lo = np.clip(i1 - r1, 0, n1)
        hi = np.clip(i1 + r1 + 1, 0, n1)
        far = (PW[lo, cols] <= T) | (SW[hi, cols] <= T)

        i2 = a2[i1]
        clo = np.clip(i2 - r2, 0, n2)
        chi = np.clip(i2 + r2 + 1, 0, n2)
        flags = np.zeros((c1, len(offsets)), dtype=bool)
        nodes = np.zeros((c1, len(offsets)), dtype=np.intp)
        for d1 in range(-r1, r1 + 1):
            r = i1 + d1
            ok = (r >= 0) & (r < n1)
            rc = np.clip(r, 0, n1 - 1)
            outside = np.minimum(PV[rc, clo], SV[rc, chi]) - s1 * x1[rc]
            far |= ok & (outside <= T)
        for k, (d1, d2) in enumerate(offsets):
            r, c = i1 + d1, i2 + d2
            ok = (r >= 0) & (r < n1) & (c >= 0) & (c < n2)
            rc, cc = np.clip(r, 0, n1 - 1), np.clip(c, 0, n2 - 1)
            val = V[rc, cc] - s1 * x1[rc]
            hit = ok & (val <= T)
            if in_disk[k]:
                flags[:, k] = hit
                nodes[:, k] = rc * n2 + cc
            else:
                far |= hit

        m_all[:, j2] = m
        count = flags.sum(axis=1)
        lone = (~far) & (count == 1)
        single[lone, j2] = nodes[lone, flags[lone].argmax(axis=1)]
        for j1 in np.flatnonzero((~far) & (count > 1)):
            multi[j1 * c2 + j2] = np.sort(nodes[j1, flags[j1]])
        for j1 in np.flatnonzero(far):
            vals = V - s1[j1] * x1[:, None]
            multi[j1 * c2 + j2] = np.flatnonzero(vals.ravel() <= T[j1])

    return TiltSets(dual, m_all.ravel(), single.ravel(), multi)


# ------------------------------------------------------------ condition (i)


@dataclass
class UniquenessReport:
    dual: GridSpec
    kappa: float
    h: float
    min_values: np.ndarray
    cluster_counts: np.ndarray
    diameters: np.ndarray
    witnesses: list[int]
    sets: TiltSets = field(repr=False)
    f: SampledFunction = field(repr=False)

    @property
    def unique_everywhere(self) -> bool:
        return not self.witnesses

    def tilt(self, j: int) -> TiltResult:
        return TiltResult(
            self.dual.node(j),
            float(self.min_values[j]),
            tuple(int(k) for k in self.sets.nodes(j)),
            int(self.cluster_counts[j]),
            float(self.diameters[j]),
        )

    def results(self):
        for j in range(self.dual.size):
            yield self.tilt(j)


def uniqueness_scan(
    f: SampledFunction,
    dual: DualGridSpec,
    rel_val: float = 1e-9,
    kappa: float = 1.5,
    method: str = "fast",
) -> UniquenessReport:
    """Run the tilted problem at every dual node; flag sets wider than ``kappa * h``."""
    sets = tilt_sets(f, dual, lambda m: value_tol(m, rel_val), method)
    size = dual.size
    clusters = np.ones(size, dtype=np.intp)
    diam = np.zeros(size)
    pts = f.grid.points
    for j, nodes in sets.multi.items():
        clusters[j] = cluster_count(f.grid, nodes)
        diam[j] = diameter(pts[nodes])
    h = f.grid.h
    witnesses = np.flatnonzero(diam > kappa * h * (1 + 1e-12)).tolist()
    return UniquenessReport(dual, kappa, h, sets.min_values, clusters, diam, witnesses, sets, f)


# ----------------------------------------------------------- condition (ii)


def _triple_directions(dim: int) -> list[tuple[int, ...]]:
    if dim == 1:
        return [(1,)]
    return [(1, 0), (0, 1), (1, 1), (1, -1)]


def _shifted(arr: np.ndarray, d: Sequence[int], sign: int) -> tuple[slice, ...]:
    """Slices selecting ``arr[idx + sign*d]`` for every interior midpoint ``idx``."""
    out = []
    for n, step in zip(arr.shape, d):
        k = abs(step)
        off = sign * step
        out.append(slice(k + off, n - k + off))
    return tuple(out)


@dataclass
class EscReport:
    esc: bool
    affine_triples: list[tuple[int, int, int]]
    checked: int


def essential_strict_convexity(
    fss: SampledFunction,
    dual: DualGridSpec,
    rel_fy: float = REL_FY,
    rel_aff: float = 1e-9,
    subdiff: np.ndarray | None = None,
) -> EscReport:
    """Look for affine midpoint triples (u, m, w) of ``fss`` with ``m`` subdifferentiable.

    Triples are adjacent along each axis, plus both diagonals in 2D.
    """
    if subdiff is None:
        subdiff = subdifferentiable(fss, dual, rel_fy)
    grid = fss.grid
    A = fss.array
    S = subdiff.reshape(grid.shape)
    index = np.arange(grid.size).reshape(grid.shape)
    affine = []
    checked = 0
    for d in _triple_directions(grid.dim):
        mid = _shifted(A, d, 0)
        u, w = A[_shifted(A, d, -1)], A[_shifted(A, d, 1)]
        m = A[mid]
        live = np.isfinite(u) & np.isfinite(m) & np.isfinite(w)
        with np.errstate(invalid="ignore"):
            excess = m - 0.5 * (u + w)
            tol = rel_aff * (1.0 + np.maximum(np.maximum(np.abs(u), np.abs(m)), np.abs(w)))
        bad = live & (excess > tol)
        if bad.any():
            k = np.argwhere(bad)[0]
            raise NotConvex(f"midpoint inequality fails by {excess[tuple(k)]:.3g} along {d}")
        hit = live & S[mid] & (np.abs(excess) <= tol)
        checked += int((live & S[mid]).sum())
        iu, im, iw = index[_shifted(A, d, -1)], index[mid], index[_shifted(A, d, 1)]
        affine.extend(zip(iu[hit].tolist(), im[hit].tolist(), iw[hit].tolist()))
    return EscReport(not affine, affine, checked)


@dataclass
class AgreementReport:
    agree: bool
    mismatches: list[int]
    checked: int


def agreement_check(
    f: SampledFunction,
    fss: SampledFunction,
    dual: DualGridSpec,
    rel_fy: float = REL_FY,
    rel_val: float = 1e-9,
    subdiff: np.ndarray | None = None,
) -> AgreementReport:
    """``f == f**`` (relative ``rel_val``) at every node where ``f**`` is subdifferentiable."""
    if subdiff is None:
        subdiff = subdifferentiable(fss, dual, rel_fy)
    with np.errstate(invalid="ignore"):
        diff = np.abs(f.values - fss.values)
    ok = np.isfinite(f.values) & (diff <= value_tol(fss.values, rel_val))
    bad = np.flatnonzero(subdiff & ~ok)
    return AgreementReport(bad.size == 0, bad.tolist(), int(subdiff.sum()))


# ----------------------------------------------------------------- verdict


@dataclass
class TheoremVerdict:
    condition_i: bool
    esc: bool
    agreement: bool
    dual: str
    tolerances: Tolerances
    witnesses: list[dict]
    affine_triples: list[tuple[int, int, int]]
    mismatches: list[int]
    uniqueness: UniquenessReport = field(repr=False)

    @property
    def condition_ii(self) -> bool:
        return self.esc and self.agreement

    @property
    def consistent(self) -> bool:
        return self.condition_i == self.condition_ii

    def to_dict(self, grid: GridSpec, limit: int = 50) -> dict:
        def node(k):
            return list(grid.node(k))

        return {
            "condition_i": self.condition_i,
            "esc": self.esc,
            "agreement": self.agreement,
            "condition_ii": self.condition_ii,
            "consistent": self.consistent,
            "dual": self.dual,
            "tolerances": asdict(self.tolerances),
            "witness_count": len(self.witnesses),
            "witnesses": self.witnesses[:limit],
            "affine_triple_count": len(self.affine_triples),
            "affine_triples": [[node(k) for k in t] for t in self.affine_triples[:limit]],
            "mismatch_count": len(self.mismatches),
            "mismatches": [node(k) for k in self.mismatches[:limit]],
        }


def theorem_verdict(
    f: SampledFunction, dual: DualGridSpec, tol: Tolerances = Tolerances(), method: str = "fast"
) -> TheoremVerdict:
    f.require_proper()
    scan = uniqueness_scan(f, dual, tol.rel_val, tol.kappa, method)
    fss = biconjugate(f, dual)
    sub = subdifferentiable(fss, dual, tol.rel_fy)
    esc = essential_strict_convexity(fss, dual, tol.rel_fy, tol.rel_aff, subdiff=sub)
    agr = agreement_check(f, fss, dual, tol.rel_fy, tol.rel_val, subdiff=sub)
    witnesses = []
    for j in scan.witnesses:
        t = scan.tilt(j)
        witnesses.append(
            {
                "dual_node": list(t.dual_node),
                "min_value": t.min_value,
                "minimizers": len(t.minimizer_nodes),
                "clusters": t.cluster_count,
                "diameter": t.diameter,
            }
        )
    return TheoremVerdict(
        scan.unique_everywhere,
        esc.esc,
        agr.agree,
        str(dual),
        tol,
        witnesses,
        esc.affine_triples,
        agr.mismatches,
        scan,
    )


# -------------------------------------------------------------- MJ = ∂J*


@dataclass
class MJReport:
    equal_everywhere: bool
    discrepancies: list[int]
    checked: int


def mj_identity_check(
    f: SampledFunction, dual: DualGridSpec, rel: float = 1e-9, method: str = "fast"
) -> MJReport:
    """Compare tilted argmin sets with Fenchel-Young sets ``{x : gap(x, s) <= tol}``.

    Candidates come from one scan with a threshold wide enough for both
    tolerances, then each set is filtered exactly.
    """
    f.require_proper()
    fstar = conjugate(f, dual).values
    fmax = float(np.abs(f.values[f.finite]).max())

    def wide(m):
        return np.maximum(value_tol(m, rel), rel * (1.0 + fmax + np.abs(m))) + 1e-12 * (1 + np.abs(m))

    sets = tilt_sets(f, dual, wide, method)
    pts = f.grid.points
    S = dual.points
    # a lone candidate is the argmin, so it is in the tilted set
    lone = np.flatnonzero(sets.single >= 0)
    fx = f.values[sets.single[lone]]
    gap = sets.min_values[lone] + fstar[lone]
    bad = lone[gap > rel * (1 + np.abs(fx) + np.abs(fstar[lone]))].tolist()
    for j, nodes in sets.multi.items():
        m = sets.min_values[j]
        fx = f.values[nodes]
        vals = fx - pts[nodes] @ S[j]
        tilt = vals - m <= value_tol(m, rel)
        fy = vals + fstar[j] <= rel * (1 + np.abs(fx) + abs(fstar[j]))
        if not np.array_equal(tilt, fy):
            bad.append(j)
    bad.sort()
    return MJReport(not bad, bad, dual.size)
