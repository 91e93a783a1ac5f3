import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from biconj.geometry import convex_hull_2d, diameter, in_convex_hull, lower_hull, lower_hull_eval


def test_lower_hull_drops_collinear():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    y = np.array([0.0, 1.0, 2.0, 0.0])
    assert list(lower_hull(x, y)) == [0, 3]


def test_lower_hull_eval():
    x = np.array([-1.0, 0.0, 1.0])
    y = np.array([0.0, 1.0, 0.0])
    v = lower_hull_eval(x, y, np.array([-2.0, -1.0, 0.0, 0.5, 1.0]))
    assert v[0] == np.inf and v[1:].tolist() == [0.0, 0.0, 0.0, 0.0]


def test_hull_membership_and_diameter():
    sq = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    q = np.array([[0.5, 0.5], [1.0, 1.0], [1.1, 0.5]])
    assert in_convex_hull(sq, q, 1e-12).tolist() == [True, True, False]
    assert np.isclose(diameter(sq), np.sqrt(2))
    seg = np.array([[0.0, 0.0], [2.0, 2.0]])
    assert in_convex_hull(seg, np.array([[1.0, 1.0], [1.0, 0.0]]), 1e-12).tolist() == [True, False]
    assert len(convex_hull_2d(sq)) == 4


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=12))
def test_diameter_matches_pairwise(pts):
    p = np.array(pts)
    brute = max(np.linalg.norm(a - b) for a in p for b in p)
    assert abs(diameter(p) - brute) <= 1e-9 * (1 + brute)
