import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biconj.core import (
    INF,
    AtomOffGrid,
    Axis,
    DiscreteMeasure,
    GridSpec,
    ImproperFunction,
    InvalidValue,
    SampledFunction,
    ext_add,
    ext_dot,
    ext_scale,
    node_indices,
    pettis_expectation,
    sublevel_set,
)
from biconj.geometry import in_convex_hull

from conftest import fn, grid1, grid2


def test_extreal_arithmetic():
    assert ext_add(1.0, INF) == INF
    assert ext_add(2.0, 3.0) == 5.0
    assert ext_scale(0.0, INF) == 0.0
    assert ext_scale(0.5, INF) == INF
    assert ext_dot([0.0, 1.0], [INF, 2.0]) == 2.0
    assert ext_dot([0.5, 0.5], [INF, 2.0]) == INF
    with pytest.raises(ValueError):
        ext_scale(-1.0, 1.0)


def test_rejects_nan_and_minus_inf():
    g = grid1(n=3)
    with pytest.raises(InvalidValue):
        fn(g, [0, math.nan, 1])
    with pytest.raises(InvalidValue):
        fn(g, [0, -INF, 1])


def test_grid_nodes_and_order():
    g = grid2(-1, 1, 3)
    assert g.shape == (3, 3) and g.size == 9
    assert g.node(0) == (-1.0, -1.0)
    assert g.node(1) == (-1.0, 0.0)  # row-major: last axis fastest
    assert g.ravel(g.unravel(7)) == 7
    assert g.locate((0.0, 1.0)) == 5
    assert g.locate((0.3, 0.0)) is None
    assert grid1(-2, 2, 81).axes[0].node(40) == 0.0


def test_grid_parse_and_validation():
    g = GridSpec.parse(["-2:2:5", "0:1:3"])
    assert g.shape == (5, 3)
    with pytest.raises(ValueError):
        GridSpec.parse(["1:0:5"])
    with pytest.raises(ValueError):
        GridSpec.parse(["0:1"])
    with pytest.raises(ValueError):
        Axis(0, 1, 1)


def test_proper():
    g = grid1(n=3)
    assert fn(g, [INF, 1, INF]).is_proper
    with pytest.raises(ImproperFunction):
        fn(g, [INF] * 3).require_proper()


def test_measure_validation():
    with pytest.raises(ValueError):
        DiscreteMeasure([[0.0], [1.0]], [0.5, 0.6])
    with pytest.raises(ValueError):
        DiscreteMeasure([[0.0], [0.0]], [0.5, 0.5])
    with pytest.raises(ValueError):
        DiscreteMeasure([[0.0], [1.0]], [1.0, 0.0])
    mu = DiscreteMeasure.from_atoms([((-1.0,), 0.5), ((1.0,), 0.5)])
    assert pettis_expectation(mu) == (0.0,)
    assert len(mu) == 2


def test_integrate_and_off_grid():
    g = grid1(-1, 1, 5)
    f = fn(g, [1, 0.25, 0, 0.25, 1])
    mu = DiscreteMeasure.from_atoms([((-1.0,), 0.5), ((0.5,), 0.5)])
    assert mu.integrate(f) == pytest.approx(0.625)
    with pytest.raises(AtomOffGrid):
        node_indices(g, DiscreteMeasure.dirac((0.3,)))
    inf_f = fn(g, [INF, 0, 0, 0, 0])
    assert DiscreteMeasure.dirac((-1.0,)).integrate(inf_f) == INF


def test_tilted_keeps_inf():
    g = grid1(-1, 1, 3)
    f = fn(g, [INF, 0, 1])
    assert list(f.tilted([2.0]).values) == [INF, 0.0, -1.0]


@given(st.lists(st.floats(-10, 10), min_size=9, max_size=9), st.floats(-10, 10), st.floats(-10, 10))
def test_sublevel_monotone(vals, r1, r2):
    f = fn(grid1(n=9), vals)
    lo, hi = sorted((r1, r2))
    assert sublevel_set(f, lo) <= sublevel_set(f, hi)


@given(
    st.lists(
        st.tuples(st.integers(0, 4), st.integers(0, 4), st.floats(0.01, 1.0)),
        min_size=1,
        max_size=6,
        unique_by=lambda t: t[:2],
    )
)
def test_expectation_in_hull(atoms):
    g = grid2(-1, 1, 5)
    w = np.array([a[2] for a in atoms])
    w = w / w.sum()
    pts = np.array([g.node(g.ravel(a[:2])) for a in atoms])
    mu = DiscreteMeasure(pts, w, tol=1e-9)
    e = np.array(pettis_expectation(mu))
    assert in_convex_hull(pts, e[None, :], 1e-9)[0]
