import numpy as np
import numpy.polynomial.polynomial as P
from hypothesis import given, settings, strategies as st

from multisecant import INFINITY, nonspecial_monomial, random_point
from multisecant import _series as S

K = 8


def test_local_expansion_satisfies_curve_equation(curve2):
    for point, branch in ((random_point(curve2, 1), False), (curve2.branch_points[2], True)):
        xs, ys = S.local_xy(curve2, point, K, branch)
        lhs = S.mul(ys, ys, K)
        rhs = S.compose_poly(curve2.f, xs, K)
        assert np.allclose(lhs, rhs, atol=1e-9)


def test_vanishing_orders_at_infinity(curve2):
    # x^k vanishes to order 2n - 2k at infinity, y to order 2n - 5
    sys3 = nonspecial_monomial(curve2, 3, [0, 1, 3, 4])
    M = S.section_series(sys3.arrays, 3, curve2, INFINITY, K, True)
    orders = [int(np.flatnonzero(np.abs(row) > 1e-12)[0]) for row in M]
    assert orders == [6, 4, 0, 1]


def test_vanishing_order_at_branch_point(curve2):
    # x - b vanishes to order 2 at (b, 0)
    b = curve2.branch_points[1]
    row = S.section_series([(np.array([-b.x, 1]), np.zeros(1))], 1, curve2, b, K, True)[0]
    assert abs(row[0]) < 1e-12 and abs(row[1]) < 1e-12 and abs(row[2]) > 1e-3


coeffs = st.lists(st.floats(-3, 3), min_size=2, max_size=6)


@settings(max_examples=50, deadline=None)
@given(coeffs, st.floats(-2, 2))
def test_taylor_shift(poly, x0):
    shifted = S.taylor_shift(poly, x0)
    for u in (0.0, 0.3, -0.7):
        assert np.isclose(P.polyval(u, shifted), P.polyval(x0 + u, poly), atol=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5, 3), st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_revert_inverts(lead, rest):
    F = np.array([0, lead] + rest, dtype=complex)
    u = S.revert(F, K)
    assert np.allclose(S.compose_poly(F, u, K), np.eye(K)[1], atol=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5, 4), st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_sqrt_series(a0, rest):
    a = np.array([a0] + rest, dtype=complex)
    y = S.sqrt_series(a, np.sqrt(a0), K)
    assert np.allclose(S.mul(y, y, K), np.concatenate([a, np.zeros(K - len(a))]), atol=1e-8)
