import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multisecant import (
    INFINITY, Divisor, canonical, fiber, involution, is_defined, multiple_g12, multiplicity,
    nonspecial_monomial, random_point, section_divisor, strata_level,
    verify_multiplicity_numeric, xi,
)
from multisecant.constructions import random_hyperplane, tangent_hyperplane
from multisecant.errors import (
    BasePointFound, DependentSelection, HypothesisViolated, NotInFiber, WrongDegree, ZeroSection,
)
from multisecant.linser import (
    Hyperplane, generic_fiber_degree, monomial_basis, normalize_projective, pole_order,
    projective_distance,
)

N3 = [0, 1, 3, 4]       # 1, x, x^3, y
N4 = [0, 1, 2, 4, 5]    # 1, x, x^2, x^4, y


def test_monomial_basis_pole_orders(curve2):
    basis = monomial_basis(curve2, 3)
    assert [lab for lab, _, _ in basis] == ["x^0", "x^1", "x^2", "x^3", "x^0*y"]
    assert [pole_order(curve2, A, B) for _, A, B in basis] == [0, 2, 4, 6, 5]


def test_system_kinds(curve2):
    g12 = multiple_g12(curve2, 3)
    assert (g12.n, g12.d, g12.deg_phi) == (3, 6, 2)
    ns = nonspecial_monomial(curve2, 3, N3)
    assert ns.has_y_term and ns.deg_phi == 1
    K = canonical(curve2)
    assert K.n == 1 and K.deg_phi == 2


def test_base_point_at_infinity_rejected(curve2):
    # 1, x, x^2, y never reaches pole order 6
    with pytest.raises(BasePointFound):
        nonspecial_monomial(curve2, 3, [0, 1, 2, 4])


def test_bad_selections(curve2):
    with pytest.raises(DependentSelection):
        nonspecial_monomial(curve2, 3, [0, 1, 1, 4])
    with pytest.raises(DependentSelection):
        nonspecial_monomial(curve2, 3, [0, 1, 3, 9])
    with pytest.raises(HypothesisViolated):
        nonspecial_monomial(curve2, 1, [0, 1])


def test_generic_fiber_degree_formula(curve2):
    # binom(d/deg phi, n) * deg(phi)^n
    assert generic_fiber_degree(multiple_g12(curve2, 2)) == 4
    assert generic_fiber_degree(multiple_g12(curve2, 3)) == 8
    assert generic_fiber_degree(nonspecial_monomial(curve2, 3, N3)) == math.comb(6, 3)
    assert generic_fiber_degree(canonical(curve2)) == 2


@pytest.mark.parametrize("n", [2, 3])
def test_section_divisor_zeros(curve2, n):
    S = multiple_g12(curve2, n)
    for seed in range(3):
        H = random_hyperplane(S, seed)
        D = section_divisor(S, H)
        assert D.degree == 2 * n and D.is_effective
        for p, _ in D.support:
            # independent check: the section itself vanishes at p
            assert abs(H.vector @ S.evaluate(p)) < 1e-8 * (1 + abs(p.x)) ** n


def test_section_divisor_nonspecial_zeros(curve2):
    S = nonspecial_monomial(curve2, 3, N3)
    H = random_hyperplane(S, 7)
    D = section_divisor(S, H)
    assert D.degree == 6
    for p, _ in D.support:
        assert abs(H.vector @ S.evaluate(p)) < 1e-8 * (1 + abs(p.x)) ** 3


def test_section_divisor_infinity_and_branch(curve2):
    S = multiple_g12(curve2, 2)
    # x (x - 0.5): pole order 4, zeros 2*(0,0) and the pair over 0.5
    D = section_divisor(S, [0, -0.5, 1])
    assert D.mult(curve2.branch_points[0]) == 2
    assert D.mult(curve2.point_from_x(0.5, 1)) == 1
    assert D.mult(curve2.point_from_x(0.5, -1)) == 1
    # the constant section vanishes only at infinity
    assert section_divisor(S, [1, 0, 0]).support == ((INFINITY, 4),)
    with pytest.raises(ZeroSection):
        section_divisor(S, [0, 0, 0])


@pytest.mark.parametrize("n,expected", [(2, 4), (3, 8)])
def test_generic_fibers_of_g12_multiple(curve2, n, expected):
    S = multiple_g12(curve2, n)
    for seed in range(5):
        fib = fiber(S, random_hyperplane(S, seed))
        assert len(fib) == expected
        assert all(fp.multiplicity == 1 for fp in fib)


def test_generic_fiber_nonspecial(curve2):
    S = nonspecial_monomial(curve2, 3, N3)
    fib = fiber(S, random_hyperplane(S, 3))
    assert len(fib) == 20
    assert all(fp.multiplicity == 1 for fp in fib)


def test_tangent_member_of_pencil_multiple(curve2):
    # (x - a)^2 cuts 2P + 2P'; P + P' is undefined, 2P and 2P' are simple
    S = multiple_g12(curve2, 2)
    P_ = curve2.point_from_x(0.5 + 0.7j)
    Q_ = involution(P_)
    a = P_.x
    H = Hyperplane.from_vector([a * a, -2 * a, 1])
    assert not is_defined(S, Divisor.from_points([P_, Q_]))
    assert xi(S, Divisor.from_points([P_, Q_])) is None
    fib = fiber(S, H)
    got = sorted((fp.divisor.mult(P_), fp.divisor.mult(Q_), fp.multiplicity) for fp in fib)
    assert got == [(0, 2, 1), (2, 0, 1)]


def test_tangent_multiplicity_nonspecial(curve2):
    S = nonspecial_monomial(curve2, 3, N3)
    H = tangent_hyperplane(S, 1, 11)
    D = section_divisor(S, H)
    assert strata_level(D) == 1
    fib = fiber(S, H)
    double = [p for p, m in D.support if m == 2][0]
    for fp in fib:
        expected = 2 if fp.divisor.mult(double) == 1 else 1
        assert fp.multiplicity == expected
        assert multiplicity(S, H, fp.divisor) == expected
    # multiplicities add up to the generic degree
    assert sum(fp.multiplicity for fp in fib) == 20


def test_census_agrees_with_combinatorial_multiplicity(curve2):
    S = nonspecial_monomial(curve2, 3, N3)
    H = tangent_hyperplane(S, 1, 11)
    fib = fiber(S, H)
    for fp in fib[:4]:
        assert verify_multiplicity_numeric(S, H, fp.divisor, seed=5) == fp.multiplicity


def test_multiplicity_rejects_non_members(curve2):
    S = multiple_g12(curve2, 2)
    H = random_hyperplane(S, 0)
    F = Divisor.from_points([random_point(curve2, 1), random_point(curve2, 2)])
    with pytest.raises(NotInFiber):
        multiplicity(S, H, F)
    with pytest.raises(WrongDegree):
        xi(S, Divisor.from_points([random_point(curve2, 1)]))


def test_strata_level(curve2):
    p = [random_point(curve2, k) for k in range(3)]
    assert strata_level(Divisor.from_pairs([(p[0], 1), (p[1], 1)])) == 0
    assert strata_level(Divisor.from_pairs([(p[0], 2), (p[1], 1)])) == 1
    assert strata_level(Divisor.from_pairs([(p[0], 4), (p[2], 3)])) == 3


vectors = st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=2, max_size=6)
scalars = st.tuples(st.floats(0.1, 10), st.floats(-math.pi, math.pi))


@settings(max_examples=60, deadline=None)
@given(vectors, scalars)
def test_normalize_projective_is_scale_invariant(v, s):
    v = np.array([complex(a, b) for a, b in v])
    if np.max(np.abs(v)) < 1e-3:
        return
    c = s[0] * np.exp(1j * s[1])
    # ties between entries of equal size may legitimately pick another index
    mags = np.sort(np.abs(v))
    if len(mags) > 1 and mags[-1] - mags[-2] < 1e-9 * mags[-1]:
        return
    assert np.allclose(normalize_projective(c * v), normalize_projective(v), atol=1e-12)
    assert projective_distance(v, c * v) < 1e-7
    assert np.max(np.abs(normalize_projective(v))) == pytest.approx(1.0)
