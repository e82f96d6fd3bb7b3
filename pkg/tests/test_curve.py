from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multisecant import INFINITY, Divisor, involution, new_curve, point_from_x, random_point
from multisecant.curve import divisor_add, divisor_degree, divisor_leq, flat_seed
from multisecant.errors import EvenDegree, NotSquarefree

from conftest import QUINTIC


def test_genus_from_degree():
    assert new_curve(QUINTIC).genus == 2
    assert new_curve([0, -1, 0, 1]).genus == 1
    assert new_curve([1, 0, 0, 0, 0, 0, 0, 1]).genus == 3


def test_rational_coefficients_are_exact():
    c = new_curve([(1, 3), 0, (-2, 7), 1])
    assert c.f_coeffs == (Fraction(1, 3), 0, Fraction(-2, 7), 1)


def test_even_degree_rejected():
    with pytest.raises(EvenDegree):
        new_curve([1, 0, 0, 0, 1])


def test_repeated_root_rejected():
    # x^2 (x - 1)(x - 2)(x - 3)
    with pytest.raises(NotSquarefree):
        new_curve([0, 0, -6, 11, -6, 1])


def test_branch_points(curve2):
    xs = [p.x for p in curve2.branch_points if p.is_finite]
    assert np.allclose(xs, [0, 1, 2, 3, 4], atol=1e-13)
    assert curve2.branch_points[-1] is INFINITY
    assert all(curve2.is_branch(p) for p in curve2.branch_points)


def test_point_from_x_sheets(curve2):
    p = point_from_x(curve2, 0.5 + 0.25j, 1)
    m = point_from_x(curve2, 0.5 + 0.25j, -1)
    assert curve2.on_curve(p) and curve2.on_curve(m)
    assert m == involution(p)
    assert not curve2.is_branch(p)


def test_point_near_root_snaps_to_branch(curve2):
    p = point_from_x(curve2, 2 + 1e-13)
    assert p.y == 0 and abs(p.x - 2) < 1e-12
    assert involution(p) == p


def test_random_point_is_deterministic(curve2):
    assert random_point(curve2, (3, 4)) == random_point(curve2, (3, 4))
    assert random_point(curve2, 1) != random_point(curve2, 2)
    assert curve2.on_curve(random_point(curve2, 5))


def test_flat_seed():
    assert flat_seed(((1, 2), 3)) == [1, 2, 3]


def test_divisor_merges_coincident_points(curve2):
    p = random_point(curve2, 1)
    D = Divisor.from_points([p, p, INFINITY])
    assert D.degree == 3
    assert D.mult(p) == 2
    assert (D - Divisor.from_points([p, p])).support == ((INFINITY, 1),)


def test_divisor_leq(curve2):
    p, q = random_point(curve2, 1), random_point(curve2, 2)
    F = Divisor.from_points([p])
    H = Divisor.from_points([p, q, q])
    assert divisor_leq(F, H)
    assert not divisor_leq(H, F)
    assert not divisor_leq(Divisor.from_points([p, p]), H)


points = st.lists(st.tuples(st.integers(0, 5), st.integers(-3, 3)), max_size=6)


def _build(curve, pairs):
    return Divisor.from_pairs([(random_point(curve, k), m) for k, m in pairs])


@settings(max_examples=40, deadline=None)
@given(points, points)
def test_divisor_arithmetic_properties(a, b):
    curve = new_curve(QUINTIC)
    A, B = _build(curve, a), _build(curve, b)
    assert divisor_add(A, B) == divisor_add(B, A)
    assert divisor_degree(A + B) == divisor_degree(A) + divisor_degree(B)
    assert (A + B) - B == A
    assert A - A == Divisor.zero()
    assert (3 * A).degree == 3 * A.degree
    assert all(m != 0 for _, m in A.support)
