import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biconj.core import INF, GridSpec
from biconj.envelope import minimizer_hull_check
from biconj.theorem import (
    NotConvex,
    Tolerances,
    agreement_check,
    essential_strict_convexity,
    mj_identity_check,
    theorem_verdict,
    tilt_sets,
    tilted_argmin,
    uniqueness_scan,
    value_tol,
)
from biconj.transform import auto_dual_grid, biconjugate, conjugate, fenchel_young_gap

from conftest import fn, grid1, grid2

G9 = grid1(-2, 2, 9)
X9 = G9.axes[0].nodes


def nodes_of(grid, idx):
    return [grid.node(k)[0] for k in idx]


def test_tilted_argmin_examples():
    t = tilted_argmin(fn(G9, np.abs(X9)), [1.0])
    assert nodes_of(G9, t.minimizer_nodes) == [0, 0.5, 1, 1.5, 2]
    assert t.cluster_count == 1 and t.diameter == 2.0
    t = tilted_argmin(fn(G9, X9**2), [0.0])
    assert nodes_of(G9, t.minimizer_nodes) == [0.0] and t.diameter == 0.0
    t = tilted_argmin(fn(G9, (X9**2 - 1) ** 2), [0.0])
    assert nodes_of(G9, t.minimizer_nodes) == [-1, 1]
    assert t.cluster_count == 2 and t.diameter == 2.0


def test_uniqueness_scan_examples():
    dual = GridSpec.regular((-2, 2, 21))
    assert uniqueness_scan(fn(G9, X9**2), dual).unique_everywhere
    rep = uniqueness_scan(fn(G9, np.abs(X9)), dual)
    j = dual.locate((1.0,))
    assert j in rep.witnesses and rep.diameters[j] == 2.0
    h = 0.5
    dip = fn(G9, X9**2 + (X9 == 0))
    rep = uniqueness_scan(dip, dual)
    j0 = dual.locate((0.0,))
    assert j0 in rep.witnesses
    assert nodes_of(G9, rep.tilt(j0).minimizer_nodes) == [-h, h]
    assert rep.diameters[j0] == 2 * h


def test_esc_examples():
    dual = GridSpec.regular((-5, 5, 41))
    assert essential_strict_convexity(fn(G9, X9**2), dual).esc
    assert not essential_strict_convexity(fn(G9, np.zeros(9)), dual).esc
    g5 = grid1(-2, 2, 5)
    a = fn(g5, np.abs(g5.axes[0].nodes))
    rep = essential_strict_convexity(biconjugate(a, dual), dual)
    assert not rep.esc
    assert (g5.locate((0.0,)), g5.locate((1.0,)), g5.locate((2.0,))) in rep.affine_triples
    with pytest.raises(NotConvex):
        essential_strict_convexity(fn(G9, -(X9**2)), dual)


def test_agreement_examples():
    dual = auto_dual_grid(fn(G9, X9**2))
    sq = fn(G9, X9**2)
    assert agreement_check(sq, biconjugate(sq, dual), dual).agree
    dw = fn(G9, (X9**2 - 1) ** 2)
    d = auto_dual_grid(dw)
    rep = agreement_check(dw, biconjugate(dw, d), d)
    assert not rep.agree and G9.locate((0.0,)) in rep.mismatches
    pt = fn(G9, np.where(X9 == 0, 0.0, INF))
    assert agreement_check(pt, biconjugate(pt, dual), dual).agree


def test_verdict_examples():
    for vals, expect in [(X9**2, True), (np.abs(X9), False), ((X9**2 - 1) ** 2, False)]:
        f = fn(G9, vals)
        v = theorem_verdict(f, auto_dual_grid(f))
        assert v.consistent and v.condition_i is expect and v.condition_ii is expect


def test_mj_examples():
    sq = fn(G9, X9**2)
    assert mj_identity_check(sq, auto_dual_grid(sq)).equal_everywhere
    z = fn(G9, np.zeros(9))
    dual = GridSpec.regular((-1, 1, 3))
    assert mj_identity_check(z, dual).equal_everywhere
    assert tilted_argmin(z, [0.0]).minimizer_nodes == tuple(range(9))
    a = fn(G9, np.abs(X9))
    d = auto_dual_grid(a, count=9, pad=0.0)  # nodes -1, -0.75, ..., 1
    j = d.locate((1.0,))
    fstar = conjugate(a, d)
    fy = [k for k in range(9) if fenchel_young_gap(a, fstar, k, j) <= 1e-9]
    assert nodes_of(G9, fy) == [0, 0.5, 1, 1.5, 2]
    assert mj_identity_check(a, d).equal_everywhere


@given(st.integers(0, 2**32 - 1), st.integers(2, 7), st.integers(2, 7))
def test_fast_tilt_sets_equal_brute_2d(seed, n1, n2):
    r = np.random.default_rng(seed)
    g = GridSpec.regular((-1, 1, n1), (-1, 2, n2))
    v = np.round(r.normal(size=g.size), 1)  # rounding creates ties
    v[r.random(g.size) < 0.2] = INF
    v[0] = 0.0
    f = fn(g, v)
    dual = GridSpec.regular((-3, 3, 9), (-2, 2, 7))
    slack = lambda m: value_tol(m, 1e-9)
    a, b = tilt_sets(f, dual, slack, "fast"), tilt_sets(f, dual, slack, "brute")
    assert np.array_equal(a.min_values, b.min_values)
    for j in range(dual.size):
        assert np.array_equal(a.nodes(j), b.nodes(j))


@given(st.integers(0, 2**32 - 1), st.floats(-5, 5))
def test_constant_shift_invariance(seed, c):
    r = np.random.default_rng(seed)
    f = fn(G9, r.integers(0, 4, size=9).astype(float))
    dual = GridSpec.regular((-2, 2, 17))
    a, b = theorem_verdict(f, dual), theorem_verdict(f.with_values(f.values + c), dual)
    assert (a.condition_i, a.esc, a.agreement) == (b.condition_i, b.esc, b.agreement)
    for j in range(dual.size):
        assert a.uniqueness.tilt(j).minimizer_nodes == b.uniqueness.tilt(j).minimizer_nodes


@given(st.integers(0, 2**32 - 1), st.sampled_from([0.5, 2.0, 4.0]))
def test_scaling_covariance(seed, alpha):
    r = np.random.default_rng(seed)
    f = fn(G9, r.integers(0, 4, size=9).astype(float))
    dual = GridSpec.regular((-2, 2, 17))
    a = uniqueness_scan(f, dual)
    b = uniqueness_scan(f.with_values(alpha * f.values), dual.scaled(alpha))
    for j in range(dual.size):
        assert a.tilt(j).minimizer_nodes == b.tilt(j).minimizer_nodes


@given(st.integers(0, 2**32 - 1))
def test_corollary_consistency(seed):
    # a failure of condition (i) at s shows up as a multi-node argmin hull of f - <s, .>
    r = np.random.default_rng(seed)
    f = fn(G9, r.integers(0, 4, size=9).astype(float))
    dual = GridSpec.regular((-2, 2, 17))
    v = theorem_verdict(f, dual)
    for w in v.witnesses:
        tilted = f.tilted(w["dual_node"])
        rep = minimizer_hull_check(tilted, biconjugate(tilted, auto_dual_grid(tilted)))
        assert len(rep.hull_nodes) > 1


def test_convex_uniqueness_matches_fy_diameter():
    f = fn(G9, np.abs(X9) + 0.5 * np.maximum(X9 - 1, 0))
    dual = auto_dual_grid(f)
    rep = uniqueness_scan(f, dual)
    fstar = conjugate(f, dual)
    for j in range(dual.size):
        fy = [k for k in range(9) if fenchel_young_gap(f, fstar, k, j) <= 1e-9 * (1 + abs(fstar(j)))]
        wide = (max(fy) - min(fy)) * 0.5 > 1.5 * 0.5
        assert wide == (j in rep.witnesses)


def test_verdict_2d_small():
    g = grid2(-2, 2, 9)
    P = g.points
    for vals, expect in [(P[:, 0] ** 2 + P[:, 1] ** 2, True), (P[:, 0] ** 2, False)]:
        f = fn(g, vals)
        v = theorem_verdict(f, auto_dual_grid(f))
        assert v.consistent and v.condition_i is expect


def test_tolerances_validated():
    with pytest.raises(ValueError):
        Tolerances(kappa=0.5)
    with pytest.raises(ValueError):
        Tolerances(rel_val=0.0)
