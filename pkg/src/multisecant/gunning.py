"""Gunning multisecant tuples and numerical verifiers built on them.

All Jacobian vectors are normalized Abel-Jacobi coordinates with base
point infinity, so a line bundle O(D) of degree n is represented by
AJ(D - n*inf).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .curve import (
    INFINITY, TOL_POINT, CurvePoint, Divisor, flat_seed, point_distance, random_point,
)
from .errors import (
    DecompositionNotInSystem, InconsistentDecomposition, PointsNotDistinct,
)
from .linser import (
    TOL_RANK, LinearSystem, census_distance, fiber, hyperplane_containing,
    multiplicity_from_divisors, section_divisor, strata_level, xi,
)
from .periods import (
    JacPoint, PeriodData, abel_jacobi, half_period, lattice_residual,
)
from .report import HYPOTHESIS_NOT_MET, SKIPPED, VerificationReport
from .theta import ABS_TOL, RANK_RATIO, kummer_vector, numerical_rank

TOL_RELATION = 1e-7
GAP_MIN = 1e3
CONTROL_MIN = 1e-3


# ----------------------------------------------------------------------
# Gunning tuples
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GunningTuple:
    p: tuple
    q: tuple
    halfperiod: int
    u: tuple  # JacPoints a_1..a_ell

    @property
    def ell(self) -> int:
        return len(self.p)


def _pdiv(pairs):
    return Divisor.from_pairs(pairs)


def _require_distinct(points, tol=TOL_POINT):
    for a, b in itertools.combinations(points, 2):
        if point_distance(a, b) <= tol:
            raise PointsNotDistinct(f"{a!r} and {b!r} coincide")
    if any(p.at_infinity for p in points):
        raise PointsNotDistinct("the points p_i, q_j must be finite")


def make_gunning(curve, periods: PeriodData, p, q, halfperiod: int = 0) -> GunningTuple:
    """u_1 = AJ(2 p_1 + sum q - sum p)/2 + h, u_i = u_1 + AJ(p_i - p_1)."""
    p, q = tuple(p), tuple(q)
    ell = len(p)
    if ell < 3 or len(q) != ell - 2:
        raise ValueError("need ell >= 3 points p and ell - 2 points q")
    _require_distinct(p + q)
    base = [(x, -1) for x in p] + [(x, 1) for x in q]
    u1 = 0.5 * abel_jacobi(curve, periods, _pdiv(base + [(p[0], 2)])).v
    u1 = u1 + half_period(periods, halfperiod).v
    us = [JacPoint(u1)]
    for i in range(1, ell):
        us.append(JacPoint(u1 + abel_jacobi(curve, periods, _pdiv([(p[i], 1), (p[0], -1)])).v))
    return GunningTuple(p, q, halfperiod, tuple(us))


def relation_residuals(t: GunningTuple, periods: PeriodData) -> dict:
    """Max lattice residual of each defining congruence over all i, j."""
    curve = periods.curve
    base = [(x, -1) for x in t.p] + [(x, 1) for x in t.q]
    r_sq = r_prod = r_diff = 0.0
    for i in range(t.ell):
        D = _pdiv(base + [(t.p[i], 2)])
        r_sq = max(r_sq, lattice_residual(periods, 2 * t.u[i].v - abel_jacobi(curve, periods, D).v))
    for i, j in itertools.combinations(range(t.ell), 2):
        D = _pdiv(base + [(t.p[i], 1), (t.p[j], 1)])
        r_prod = max(r_prod, lattice_residual(
            periods, t.u[i].v + t.u[j].v - abel_jacobi(curve, periods, D).v))
        D = _pdiv([(t.p[i], 1), (t.p[j], -1)])
        r_diff = max(r_diff, lattice_residual(
            periods, t.u[i].v - t.u[j].v - abel_jacobi(curve, periods, D).v))
    return {"square": r_sq, "product": r_prod, "difference": r_diff}


def random_jacobian_points(periods: PeriodData, count: int, seed) -> list:
    rng = np.random.default_rng(flat_seed(seed))
    g = periods.genus
    return [JacPoint(rng.random(g) + periods.tau @ rng.random(g)) for _ in range(count)]


def verify_gunning_secant(t: GunningTuple, periods: PeriodData,
                          rank_ratio: float = RANK_RATIO, gap_min: float = GAP_MIN,
                          control_min: float = CONTROL_MIN, seed=0,
                          abs_tol: float = ABS_TOL) -> VerificationReport:
    """Kummer images of a Gunning tuple span at most an (ell-2)-plane."""
    g, ell = periods.genus, t.ell
    rep = VerificationReport("gunning_secant", inputs={
        "ell": ell, "halfperiod": t.halfperiod, "rank_ratio": rank_ratio,
        "gap_min": gap_min})
    if ell > 2 ** g:
        raise ValueError(f"ell = {ell} exceeds 2^g = {2 ** g}")
    rel = relation_residuals(t, periods)
    for k, v in rel.items():
        rep.check(f"relation_{k}", v, TOL_RELATION)
    K = [kummer_vector(u.v, periods.tau, abs_tol) for u in t.u]
    rank, gap, s = numerical_rank(K, rank_ratio)
    rep.check("rank", rank, ell - 1, "<=")
    rep.check("sigma_ratio", float(s[ell - 1] / s[0]), rank_ratio)
    rep.check("gap", gap, gap_min, ">=")
    ctrl = random_jacobian_points(periods, ell, seed)
    Kc = [kummer_vector(u.v, periods.tau, abs_tol) for u in ctrl]
    crank, _, cs = numerical_rank(Kc, rank_ratio)
    rep.check("control_rank", crank, ell, "==")
    rep.check("control_sigma_ratio", float(cs[ell - 1] / cs[0]), control_min, ">=")
    rep.details["singular_values"] = [float(x) for x in s]
    rep.details["control_singular_values"] = [float(x) for x in cs]
    return rep


# ----------------------------------------------------------------------
# eta and the Z_n family
# ----------------------------------------------------------------------

def _x_divisor(t: GunningTuple, i: int, E: Divisor) -> Divisor:
    return _pdiv([(t.p[i], 1)] + [(x, 1) for x in t.q]) + E


def eta_vectors(t: GunningTuple, E: Divisor, periods: PeriodData) -> list:
    """eta_i = AJ(p_i + sum q + E - n inf) - u_i for every i."""
    n = t.ell - 1 + E.degree
    out = []
    for i in range(t.ell):
        D = _x_divisor(t, i, E) - _pdiv([(INFINITY, n)])
        out.append(JacPoint(abel_jacobi(periods.curve, periods, D).v - t.u[i].v))
    return out


def eta_independence(t: GunningTuple, E: Divisor, periods: PeriodData,
                     tol: float = TOL_RELATION) -> VerificationReport:
    if not E.is_effective and E.degree != 0:
        raise ValueError("E must be effective")
    rep = VerificationReport("eta_independence", inputs={
        "ell": t.ell, "deg_E": E.degree, "tol": tol})
    etas = eta_vectors(t, E, periods)
    worst = max((lattice_residual(periods, a.v - b.v)
                 for a, b in itertools.combinations(etas, 2)), default=0.0)
    rep.check("max_pairwise_residual", worst, tol)
    rep.details["eta"] = etas[0].v
    return rep


def random_effective(curve, degree: int, seed) -> Divisor:
    return Divisor.from_points([random_point(curve, (seed, k)) for k in range(degree)])


def z_family_sample(t: GunningTuple, n: int, count: int, seed, periods: PeriodData) -> list:
    """eta-vectors for `count` random effective E of degree n - ell + 1."""
    if n < t.ell - 1:
        raise ValueError("need n >= ell - 1")
    k = n - t.ell + 1
    curve = periods.curve
    return [eta_vectors(t, random_effective(curve, k, (seed, j)), periods)[0]
            for j in range(count)]


def z_family_dimension(t: GunningTuple, n: int, periods: PeriodData, seed=0,
                       step: float = 1e-4, samples: Optional[int] = None,
                       tol_ratio: float = 1e-3) -> int:
    """Complex rank of finite-difference tangent vectors of the eta family at a random E."""
    k = n - t.ell + 1
    if k == 0:
        return 0
    curve = periods.curve
    E = random_effective(curve, k, (seed, 7919))
    pts = E.expanded()
    rng = np.random.default_rng(flat_seed(seed))
    diffs = []
    for _ in range(samples or 2 * periods.genus + 2):
        moved = []
        for p in pts:
            dx = step * complex(rng.normal(), rng.normal())
            cand = curve.point_from_x(p.x + dx, 1)
            if abs(cand.y - p.y) > abs(cand.y + p.y):
                cand = CurvePoint(cand.x, -cand.y)
            moved.append(cand)
        # eta(E') - eta(E) = AJ(E' - E); take the small representative
        v = abel_jacobi(curve, periods, Divisor.from_points(moved) - E).v
        v = _nearest_representative(periods, v)
        diffs.append(v / step)
    rank, _, _ = numerical_rank(diffs, tol_ratio)
    return rank


def _nearest_representative(periods, v):
    Y = periods.tau.imag
    y = np.linalg.solve(Y, v.imag)
    x = v.real - periods.tau.real @ y
    return v - np.round(x) - periods.tau @ np.round(y)


# ----------------------------------------------------------------------
# partitions and the reciprocal construction
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class HDecomposition:
    """H = P_1 + ... + P_{2 ell - 2} + 2 E with simple P_i off supp E."""

    P: tuple
    E: Divisor

    @property
    def ell(self) -> int:
        return (len(self.P) + 2) // 2

    @property
    def divisor(self) -> Divisor:
        return Divisor.from_points(self.P) + 2 * self.E

    @property
    def expected_multiplicity(self) -> int:
        return math.prod(math.comb(2 * m, m) for _, m in self.E.support)

    def validate(self):
        if len(self.P) % 2 or len(self.P) < 4:
            raise InconsistentDecomposition("need 2 ell - 2 >= 4 simple points")
        try:
            _require_distinct(tuple(p for p in self.P if p.is_finite))
        except PointsNotDistinct as exc:
            raise InconsistentDecomposition(str(exc)) from exc
        if sum(p.at_infinity for p in self.P) > 1:
            raise InconsistentDecomposition("infinity repeated among the P_i")
        for p in self.P:
            if self.E.mult(p):
                raise InconsistentDecomposition(f"{p!r} lies in both P and E")
        if not self.E.is_effective:
            raise InconsistentDecomposition("E must be effective")

    @classmethod
    def from_section(cls, system: LinearSystem, H, E: Divisor,
                     match_tol: float = 1e-6) -> "HDecomposition":
        """Split div(H) as P + 2E for a given E."""
        Hdiv = section_divisor(system, H)
        P = []
        for p, m in Hdiv.support:
            rest = m - 2 * E.mult(p, match_tol)
            if rest < 0 or rest > 1:
                raise InconsistentDecomposition(
                    f"{p!r}: multiplicity {m} in H, {E.mult(p, match_tol)} in E")
            if rest:
                P.append(p)
        # use H's own coordinates for E's points
        Epairs = []
        for p, m in E.support:
            match = [q for q in Hdiv.points if census_distance(system.curve, Divisor.from_points([q]),
                                                               Divisor.from_points([p])) <= match_tol]
            Epairs.append((match[0] if match else p, m))
        dec = cls(tuple(P), Divisor.from_pairs(Epairs))
        if len(P) + 2 * E.degree != Hdiv.degree:
            raise InconsistentDecomposition("div(H) is not P + 2E")
        dec.validate()
        return dec


@dataclass(frozen=True)
class PartitionSigma:
    points: tuple  # P_1..P_{2 ell - 2}
    subset: tuple  # indices of the ell points p_i

    @property
    def p(self) -> tuple:
        return tuple(self.points[i] for i in self.subset)

    @property
    def q(self) -> tuple:
        return tuple(pt for i, pt in enumerate(self.points) if i not in self.subset)


def all_partitions(points) -> list:
    points = tuple(points)
    ell = (len(points) + 2) // 2
    return [PartitionSigma(points, c) for c in itertools.combinations(range(len(points)), ell)]


def x_sigma(dec: HDecomposition, sigma: PartitionSigma) -> list:
    """x_i = p_i + sum q_j + E for the ell points p_i of the partition."""
    dec.validate()
    if tuple(sigma.points) != tuple(dec.P) or len(sigma.subset) != dec.ell:
        raise InconsistentDecomposition("partition does not match the decomposition")
    qsum = Divisor.from_points(sigma.q)
    return [Divisor.from_points([p]) + qsum + dec.E for p in sigma.p]


def eta_from_system(system: LinearSystem, periods: PeriodData, halfperiod: int = 0) -> JacPoint:
    """eta with eta^2 = O(2n inf): the half-period h, i.e. eta = O(n inf) + h."""
    return half_period(periods, halfperiod)


def _hyperplane_of(system, dec: HDecomposition, match_tol=1e-6):
    H = hyperplane_containing(system, dec.divisor)
    if H is None:
        raise DecompositionNotInSystem("no unique hyperplane of the system contains H")
    Hdiv = section_divisor(system, H)
    if Hdiv.degree != dec.divisor.degree or \
            census_distance(system.curve, Hdiv, dec.divisor) > match_tol:
        raise DecompositionNotInSystem("the section divisor differs from P + 2E")
    return H, Hdiv


def verify_reciprocal(system: LinearSystem, dec: HDecomposition, sigma: PartitionSigma,
                      halfperiod: int, periods: PeriodData, tol_proj: float = 1e-7,
                      rank_ratio: float = RANK_RATIO, gap_min: float = GAP_MIN,
                      tol_rank: float = TOL_RANK, abs_tol: float = ABS_TOL) -> VerificationReport:
    dec.validate()
    n = dec.ell - 1 + dec.E.degree
    if system.n != n:
        raise InconsistentDecomposition(f"system has n = {system.n} but ell - 1 + deg E = {n}")
    H, Hdiv = _hyperplane_of(system, dec)
    xs = x_sigma(dec, sigma)
    want = dec.expected_multiplicity
    rep = VerificationReport("reciprocal", inputs={
        "ell": dec.ell, "n": n, "deg_E": dec.E.degree, "subset": list(sigma.subset),
        "halfperiod": halfperiod, "expected_multiplicity": want})
    defined = []
    for i, x in enumerate(xs):
        image = xi(system, x, tol_rank)
        if image is None:
            continue
        defined.append(i)
        rep.check(f"xi_constant[{i}]", image.distance(H), tol_proj)
        rep.check(f"multiplicity[{i}]", multiplicity_from_divisors(Hdiv, x), want, "==")
    rep.details["defined"] = defined
    # Kummer images of a_i = O(x_i) - eta
    e = eta_from_system(system, periods, halfperiod)
    K = []
    for x in xs:
        u = abel_jacobi(periods.curve, periods, x - Divisor.from_pairs([(INFINITY, n)])).v - e.v
        K.append(kummer_vector(u, periods.tau, abs_tol))
    rank, gap, s = numerical_rank(K, rank_ratio)
    ell = dec.ell
    rep.check("kummer_rank", rank, ell - 1, "<=")
    if ell <= len(s):
        rep.check("kummer_sigma_ratio", float(s[ell - 1] / s[0]), rank_ratio)
        rep.check("kummer_gap", gap, gap_min, ">=")
    rep.details["singular_values"] = [float(v) for v in s]
    # converse: fiber points of the expected multiplicity are all x_j^Sigma'
    every_x = [x for sg in all_partitions(dec.P) for x in x_sigma(dec, sg)]
    extraneous = 0
    hits = 0
    for fp in fiber(system, H, tol_rank, Hdiv=Hdiv):
        if fp.multiplicity != want:
            continue
        hits += 1
        if not any(census_distance(system.curve, fp.divisor, x) <= 1e-6 for x in every_x):
            extraneous += 1
    rep.check("converse_extraneous", extraneous, 0, "==")
    rep.details["converse_candidates"] = hits
    return rep


def gunning_from_partition(system: LinearSystem, dec: HDecomposition, sigma: PartitionSigma,
                           halfperiod: int, periods: PeriodData) -> GunningTuple:
    """The tuple a_i = O(x_i^Sigma) - eta, rebuilt through make_gunning."""
    n = dec.ell - 1 + dec.E.degree
    curve = periods.curve
    e = eta_from_system(system, periods, halfperiod)
    x0 = x_sigma(dec, sigma)[0]
    u0 = abel_jacobi(curve, periods, x0 - Divisor.from_pairs([(INFINITY, n)])).v - e.v
    for k in range(4 ** periods.genus):
        t = make_gunning(curve, periods, sigma.p, sigma.q, k)
        if lattice_residual(periods, t.u[0].v - u0) <= TOL_RELATION:
            return t
    raise InconsistentDecomposition("no half-period reproduces the partition's tuple")


def verify_fiberstrat(t: GunningTuple, E: Divisor, system: LinearSystem,
                      periods: PeriodData, tol_proj: float = 1e-7,
                      tol_rank: float = TOL_RANK) -> VerificationReport:
    """If xi is defined and constant on the x_i, its value lies in the stratum n - ell + 1."""
    n = t.ell - 1 + E.degree
    if system.n != n:
        raise InconsistentDecomposition(f"system has n = {system.n} but ell - 1 + deg E = {n}")
    rep = VerificationReport("fiberstrat", inputs={
        "ell": t.ell, "n": n, "deg_E": E.degree, "halfperiod": t.halfperiod})
    etas = eta_vectors(t, E, periods)
    indep = max((lattice_residual(periods, a.v - b.v)
                 for a, b in itertools.combinations(etas, 2)), default=0.0)
    rep.check("eta_independence", indep, TOL_RELATION)
    compat = lattice_residual(periods, 2 * etas[0].v)
    rep.details["eta_square_residual"] = compat
    if compat > TOL_RELATION:
        # eta^2 is not O(2n inf): the system is not inside |eta^2|
        rep.outcome = SKIPPED
        return rep
    xs = [_x_divisor(t, i, E) for i in range(t.ell)]
    images = [xi(system, x, tol_rank) for x in xs]
    if any(h is None for h in images):
        rep.outcome = HYPOTHESIS_NOT_MET
        rep.details["undefined"] = [i for i, h in enumerate(images) if h is None]
        return rep
    spread = max(images[0].distance(h) for h in images)
    if spread > tol_proj:
        rep.outcome = HYPOTHESIS_NOT_MET
        rep.details["image_spread"] = spread
        return rep
    level = strata_level(section_divisor(system, images[0]))
    rep.check("strata_level", level, n - t.ell + 1, ">=")
    rep.details["image_spread"] = spread
    return rep
