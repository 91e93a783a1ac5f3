"""Two-phase dense primal simplex for small equality-form LPs.

Solves ``min c @ x  s.t.  A @ x = b, x >= 0`` with a handful of rows and up
to a few tens of thousands of columns. Pricing is Dantzig's most negative
reduced cost; after a run of degenerate pivots the solver switches to Bland's
lowest-index rule until the objective moves again, which rules out cycling.
Ties everywhere break towards the lowest column index, so results are
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class Infeasible(Exception):
    pass


class Unbounded(Exception):
    pass


@dataclass
class LPSolution:
    x: np.ndarray
    value: float
    basis: np.ndarray
    iterations: int


DEGENERATE_RUN = 25


def _phase(c, A, b, basis, tol_cost, tol_piv, max_iter):
    """Run primal simplex from a feasible ``basis``; returns (basis, xB, iterations)."""
    m, n = A.shape
    basis = np.array(basis, dtype=np.intp)
    degenerate_run = 0
    for it in range(max_iter):
        B = A[:, basis]
        Binv = np.linalg.inv(B)
        xB = Binv @ b
        y = c[basis] @ Binv
        r = c - y @ A
        r[basis] = 0.0
        if degenerate_run >= DEGENERATE_RUN:
            cand = np.flatnonzero(r < -tol_cost)
            if cand.size == 0:
                return basis, xB, it
            q = int(cand[0])
        else:
            q = int(np.argmin(r))
            if r[q] >= -tol_cost:
                return basis, xB, it
        d = Binv @ A[:, q]
        rows = np.flatnonzero(d > tol_piv)
        if rows.size == 0:
            raise Unbounded("objective unbounded below")
        ratios = np.maximum(xB[rows], 0.0) / d[rows]
        best = ratios.min()
        # among ties leave the basic variable with the smallest column index
        tied = rows[ratios <= best + 1e-15 * max(1.0, best)]
        leave = tied[np.argmin(basis[tied])]
        degenerate_run = degenerate_run + 1 if best <= 1e-15 else 0
        basis[leave] = q
    raise RuntimeError("simplex iteration limit reached")


def solve(
    c: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
    basis: Sequence[int] | None = None,
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> LPSolution:
    """Minimize ``c @ x`` subject to ``A @ x = b, x >= 0``.

    ``basis`` optionally names ``m`` columns to start from; it is used only if
    it is nonsingular and primal feasible, otherwise phase 1 runs. Redundant
    equality rows are removed after phase 1, in which case the returned basis
    is shorter than ``m``.
    """
    c = np.asarray(c, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m, n = A.shape
    scale = 1.0 + (np.abs(c).max() if n else 0.0)
    tol_cost = tol * scale
    tol_piv = 1e-11
    iterations = 0

    start = None
    if basis is not None and len(basis) == m and all(0 <= k < n for k in basis):
        B = A[:, list(basis)]
        if abs(np.linalg.det(B)) > 1e-14:
            xB = np.linalg.solve(B, b)
            if (xB >= -1e-13).all():
                start = np.array(basis, dtype=np.intp)

    if start is None:
        # phase 1 on [A | I] with rows sign-normalised so b >= 0
        sign = np.where(b < 0, -1.0, 1.0)
        A1 = np.hstack([A * sign[:, None], np.eye(m)])
        b1 = b * sign
        c1 = np.concatenate([np.zeros(n), np.ones(m)])
        art = np.arange(n, n + m)
        B1, xB1, it = _phase(c1, A1, b1, art, tol, tol_piv, max_iter)
        iterations += it
        if c1[B1] @ xB1 > 1e-9 * (1.0 + np.abs(b1).max()):
            raise Infeasible("no feasible point")
        B1 = _drive_out_artificials(A1, B1, n, tol_piv)
        # an artificial that cannot leave marks a redundant constraint: drop it
        stuck = B1 >= n
        keep_rows = np.setdiff1d(np.arange(m), B1[stuck] - n)
        start = B1[~stuck]
        A_run, b_run = (A * sign[:, None])[keep_rows], b1[keep_rows]
    else:
        A_run, b_run = A, b

    B, xB, it = _phase(c, A_run, b_run, start, tol_cost, tol_piv, max_iter)
    iterations += it
    x = np.zeros(n)
    x[B] = np.maximum(xB, 0.0)
    return LPSolution(x, float(c @ x), B, iterations)


def _drive_out_artificials(A1, basis, n, tol_piv):
    basis = basis.copy()
    for row in np.flatnonzero(basis >= n):
        Binv = np.linalg.inv(A1[:, basis])
        tableau_row = Binv[row] @ A1[:, :n]
        tableau_row[basis[basis < n]] = 0.0
        cand = np.flatnonzero(np.abs(tableau_row) > tol_piv)
        if cand.size:
            basis[row] = cand[0]
    return basis
