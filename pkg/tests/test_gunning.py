import math

import numpy as np
import pytest

from multisecant import (
    INFINITY, Divisor, GunningTuple, HDecomposition, JacPoint, PartitionSigma, eta_from_system,
    eta_independence, is_lattice, make_gunning, multiple_g12, nonspecial_monomial,
    verify_fiberstrat, verify_gunning_secant, verify_reciprocal, x_sigma, z_family_sample,
)
from multisecant.constructions import decomposition, random_points
from multisecant.errors import (
    DecompositionNotInSystem, InconsistentDecomposition, PointsNotDistinct,
)
from multisecant.gunning import (
    all_partitions, gunning_from_partition, relation_residuals, z_family_dimension,
)
from multisecant.periods import lattice_residual
from multisecant.report import FAIL, HYPOTHESIS_NOT_MET, PASS, SKIPPED

N3 = [0, 1, 3, 4]


def tuple_for(curve, periods, ell, seed, k=0):
    pts = random_points(curve, 2 * ell - 2, seed)
    return make_gunning(curve, periods, pts[:ell], pts[ell:], k)


@pytest.mark.parametrize("k", range(16))
def test_trisecant_every_halfperiod(curve2, periods2, k):
    t = tuple_for(curve2, periods2, 3, 1, k)
    rel = relation_residuals(t, periods2)
    assert max(rel.values()) <= 1e-9
    rep = verify_gunning_secant(t, periods2, seed=k)
    assert rep.passed, rep.failing


def test_quadrisecant(curve2, periods2):
    t = tuple_for(curve2, periods2, 4, 2, 5)
    assert t.ell == 4
    rep = verify_gunning_secant(t, periods2)
    assert rep.passed, rep.failing


def test_ell_above_two_to_the_g(curve2, periods2):
    t = tuple_for(curve2, periods2, 5, 3)
    with pytest.raises(ValueError):
        verify_gunning_secant(t, periods2)


def test_swap_preserves_differences(curve2, periods2):
    pts = random_points(curve2, 4, 4)
    t = make_gunning(curve2, periods2, pts[:3], pts[3:])
    s = make_gunning(curve2, periods2, [pts[1], pts[0], pts[2]], pts[3:])
    assert lattice_residual(periods2, (s.u[1].v - s.u[0].v) - (t.u[0].v - t.u[1].v)) <= 1e-10
    assert lattice_residual(periods2, (s.u[2].v - s.u[0].v) - (t.u[2].v - t.u[1].v)) <= 1e-10
    # u_1 of the swapped tuple is u_2 of the original up to a half-period
    assert is_lattice(periods2, 2 * (s.u[0].v - t.u[1].v))


def test_points_must_be_distinct(curve2, periods2):
    pts = random_points(curve2, 4, 5)
    with pytest.raises(PointsNotDistinct):
        make_gunning(curve2, periods2, [pts[0], pts[0], pts[1]], [pts[2]])
    with pytest.raises(PointsNotDistinct):
        make_gunning(curve2, periods2, [pts[0], pts[1], INFINITY], [pts[2]])
    with pytest.raises(ValueError):
        make_gunning(curve2, periods2, pts[:3], [])


def test_corrupted_tuple_is_rejected(curve2, periods2):
    t = tuple_for(curve2, periods2, 3, 6)
    bad = GunningTuple(t.p, t.q, t.halfperiod,
                       (t.u[0], JacPoint(t.u[1].v + np.array([0.01, 0.02j])), t.u[2]))
    assert relation_residuals(bad, periods2)["difference"] > 1e-3
    assert not eta_independence(bad, Divisor.zero(), periods2).passed
    rep = verify_gunning_secant(bad, periods2)
    assert rep.status == FAIL
    assert "sigma_ratio" in rep.failing


@pytest.mark.parametrize("deg", [0, 1, 2])
def test_eta_independent_of_i(curve2, periods2, deg):
    for ell in (3, 4):
        t = tuple_for(curve2, periods2, ell, 7 + deg, deg)
        E = Divisor.from_points(random_points(curve2, deg, 99))
        rep = eta_independence(t, E, periods2)
        assert rep.passed, rep.checks


def test_z_family(curve2, periods2):
    t = tuple_for(curve2, periods2, 3, 8)
    flat = z_family_sample(t, 2, 3, 0, periods2)
    assert max(lattice_residual(periods2, a.v - b.v) for a in flat for b in flat) <= 1e-9
    wide = z_family_sample(t, 3, 5, 0, periods2)
    seps = [lattice_residual(periods2, a.v - b.v)
            for i, a in enumerate(wide) for b in wide[i + 1:]]
    assert min(seps) > 1e-6
    assert z_family_dimension(t, 2, periods2) == 0
    assert z_family_dimension(t, 3, periods2, seed=3) == 1
    assert z_family_dimension(t, 4, periods2, seed=4) == 2
    with pytest.raises(ValueError):
        z_family_sample(t, 1, 2, 0, periods2)


def test_partitions_and_x_sigma(curve2):
    P = tuple(random_points(curve2, 4, 10))
    z = random_points(curve2, 1, 11)[0]
    dec = HDecomposition(P, Divisor.from_points([z]))
    parts = all_partitions(P)
    assert len(parts) == math.comb(4, 3)
    assert len(all_partitions(tuple(random_points(curve2, 6, 12)))) == math.comb(6, 4)
    sigma = PartitionSigma(P, (0, 2, 3))
    xs = x_sigma(dec, sigma)
    assert xs[0] == Divisor.from_points([P[0], P[1], z])
    assert xs[1] == Divisor.from_points([P[2], P[1], z])
    assert xs[2] == Divisor.from_points([P[3], P[1], z])
    assert all(x.degree == 3 for x in xs)


def test_expected_multiplicity(curve2):
    P = tuple(random_points(curve2, 4, 13))
    z, w = random_points(curve2, 2, 14)
    assert HDecomposition(P, Divisor.zero()).expected_multiplicity == 1
    assert HDecomposition(P, Divisor.from_points([z])).expected_multiplicity == 2
    assert HDecomposition(P, Divisor.from_pairs([(z, 2)])).expected_multiplicity == 6
    assert HDecomposition(P, Divisor.from_points([z, w])).expected_multiplicity == 4


def test_inconsistent_decompositions(curve2):
    P = random_points(curve2, 4, 15)
    with pytest.raises(InconsistentDecomposition):
        HDecomposition((P[0], P[0], P[1], P[2]), Divisor.zero()).validate()
    with pytest.raises(InconsistentDecomposition):
        HDecomposition(tuple(P), Divisor.from_points([P[0]])).validate()
    with pytest.raises(InconsistentDecomposition):
        HDecomposition(tuple(P[:2]), Divisor.zero()).validate()


def test_decomposition_not_in_system(curve2, periods2):
    # four random points are not involution-symmetric, so no x-polynomial cuts them
    S = multiple_g12(curve2, 2)
    dec = HDecomposition(tuple(random_points(curve2, 4, 16)), Divisor.zero())
    with pytest.raises(DecompositionNotInSystem):
        verify_reciprocal(S, dec, all_partitions(dec.P)[0], 0, periods2)


def test_eta_from_system_is_two_torsion(curve2, periods2):
    S = multiple_g12(curve2, 2)
    for k in range(16):
        assert is_lattice(periods2, 2 * eta_from_system(S, periods2, k).v)


def test_reciprocal_and_round_trip_g12(curve2, periods2):
    S = multiple_g12(curve2, 2)
    _, dec = decomposition(S, Divisor.zero(), 17)
    for sigma in all_partitions(dec.P):
        rep = verify_reciprocal(S, dec, sigma, 3, periods2)
        assert rep.passed, rep.failing
        t = gunning_from_partition(S, dec, sigma, 3, periods2)
        assert max(relation_residuals(t, periods2).values()) <= 1e-7
        # every x_i holds an involution pair, so xi is undefined somewhere
        assert verify_fiberstrat(t, dec.E, S, periods2).status == HYPOTHESIS_NOT_MET


def test_reciprocal_with_doubled_branch_point(curve2, periods2):
    S = multiple_g12(curve2, 3)
    E = Divisor.from_points([curve2.branch_points[1]])
    _, dec = decomposition(S, E, 18)
    rep = verify_reciprocal(S, dec, all_partitions(dec.P)[1], 0, periods2)
    assert rep.passed, rep.failing
    mults = [c.value for c in rep.checks if c.name.startswith("multiplicity")]
    assert mults and all(m == 2 for m in mults)


def test_fiberstrat_round_trip_nonspecial(curve2, periods2):
    S = nonspecial_monomial(curve2, 3, N3)
    E = Divisor.from_points(random_points(curve2, 1, 19))
    _, dec = decomposition(S, E, 20)
    for sigma in all_partitions(dec.P):
        t = gunning_from_partition(S, dec, sigma, 0, periods2)
        rep = verify_fiberstrat(t, dec.E, S, periods2)
        assert rep.status == PASS, rep.details
        level = [c.value for c in rep.checks if c.name == "strata_level"][0]
        assert level >= S.n - t.ell + 1


def test_fiberstrat_incompatible_eta_is_skipped(curve2, periods2):
    S = multiple_g12(curve2, 2)
    for seed in range(3):
        t = tuple_for(curve2, periods2, 3, 30 + seed, seed)
        rep = verify_fiberstrat(t, Divisor.zero(), S, periods2)
        assert rep.status == SKIPPED
        assert rep.status != PASS
