"""The acceptance battery run by `multisecant suite`.

Randomness: one SeedSequence per invocation; criterion k (1-based) uses
child k-1 of root.spawn(8), and sub-task j of a criterion uses child j of
that criterion's own spawn.  Sub-tasks are mapped over a pool and merged in
index order, so results do not depend on the number of threads.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gamma

from .constructions import (
    decomposition, random_hyperplane, random_points, tangent_hyperplane,
)
from .curve import INFINITY, Divisor, new_curve
from .errors import ClusterAmbiguity, MultisecantError
from .gunning import (
    all_partitions, eta_independence, gunning_from_partition, make_gunning,
    random_jacobian_points, relation_residuals, verify_fiberstrat, verify_reciprocal,
    z_family_dimension, z_family_sample,
)
from .linser import (
    census_counts, census_lookup, fiber, generic_fiber_degree,
    multiple_g12, nonspecial_monomial, section_divisor, strata_level,
)
from .periods import abel_jacobi, compute_periods, lattice_residual
from .report import HYPOTHESIS_NOT_MET, PASS, SKIPPED, VerificationReport
from .theta import kummer_vector, numerical_rank, theta

# genus-2 systems of the battery
SELECTION_N3 = [0, 1, 3, 4]        # 1, x, x^3, y
SELECTION_N4 = [0, 1, 2, 4, 5]     # 1, x, x^2, x^4, y


def seed_of(ss) -> tuple:
    return tuple(int(v) for v in ss.generate_state(2))


@dataclass
class Context:
    cfg: object
    curve: object
    periods: object
    pmap: Callable

    @property
    def tol(self):
        return self.cfg.tolerances

    @property
    def counts(self):
        return self.cfg.suite_counts


def _children(ss, k):
    return [seed_of(c) for c in ss.spawn(k)]


# ----------------------------------------------------------------------
# 1. fiber degree
# ----------------------------------------------------------------------

def criterion_fiber_degree(ctx: Context, ss) -> VerificationReport:
    rep = VerificationReport("criterion_1_fiber_degree")
    K = ctx.counts["fiber_hyperplanes"]
    systems = [
        ("multiple_g12(2)", multiple_g12(ctx.curve, 2)),
        ("multiple_g12(3)", multiple_g12(ctx.curve, 3)),
        ("nonspecial(3)", nonspecial_monomial(ctx.curve, 3, SELECTION_N3)),
    ]
    seeds = ss.spawn(len(systems))
    for (label, S), sub in zip(systems, seeds):
        want = generic_fiber_degree(S)
        tasks = _children(sub, K)

        def one(seed, S=S):
            fb = fiber(S, random_hyperplane(S, seed), ctx.tol["tol_rank"])
            return len(fb), max((fp.multiplicity for fp in fb), default=0)

        results = ctx.pmap(one, tasks)
        exact = sum(1 for c, m in results if c == want and m == 1)
        rep.check(f"exact_count[{label}]", exact, K, "==")
        rep.details[label] = {"expected": want, "counts": [c for c, _ in results]}
    return rep


# ----------------------------------------------------------------------
# 2. multiplicity law against the perturbation census
# ----------------------------------------------------------------------

def _census_case(ctx, S, level, seed):
    H = tangent_hyperplane(S, level, seed)
    Hdiv = section_divisor(S, H)
    fb = fiber(S, H, ctx.tol["tol_rank"], Hdiv=Hdiv)
    try:
        cands, counts = census_counts(S, H, ctx.tol["census_eps"], (seed, 99),
                                      tol_rank=ctx.tol["tol_rank"], Hdiv=Hdiv)
    except ClusterAmbiguity:
        return strata_level(Hdiv), len(fb), len(fb), True
    bad = sum(1 for fp in fb
              if census_lookup(S.curve, cands, counts, fp.divisor) != fp.multiplicity)
    return strata_level(Hdiv), len(fb), bad, False


def criterion_multiplicity(ctx: Context, ss) -> VerificationReport:
    rep = VerificationReport("criterion_2_multiplicity", inputs={
        "census_eps": ctx.tol["census_eps"]})
    K = ctx.counts["census_hyperplanes"]
    cases = [("stratum_1", nonspecial_monomial(ctx.curve, 3, SELECTION_N3), 1),
             ("stratum_2", nonspecial_monomial(ctx.curve, 4, SELECTION_N4), 2)]
    for (label, S, level), sub in zip(cases, ss.spawn(len(cases))):
        results = ctx.pmap(lambda seed, S=S, level=level: _census_case(ctx, S, level, seed),
                           _children(sub, K))
        rep.check(f"in_stratum[{label}]", sum(1 for r in results if r[0] >= level), K, "==")
        rep.check(f"mismatches[{label}]", sum(r[2] for r in results), 0, "==")
        rep.check(f"ambiguous[{label}]", sum(1 for r in results if r[3]), 0, "==")
        rep.details[label] = {"fiber_points": sum(r[1] for r in results)}
    return rep


# ----------------------------------------------------------------------
# 3. strata versus branch locus
# ----------------------------------------------------------------------

def criterion_strata(ctx: Context, ss) -> VerificationReport:
    rep = VerificationReport("criterion_3_strata")
    K = ctx.counts["strata_hyperplanes"]
    S = nonspecial_monomial(ctx.curve, 3, SELECTION_N3)

    def one(args):
        j, seed = args
        # alternate generic members and members of the first stratum
        H = random_hyperplane(S, seed) if j % 2 == 0 else tangent_hyperplane(S, 1, seed)
        Hdiv = section_divisor(S, H)
        fb = fiber(S, H, ctx.tol["tol_rank"], Hdiv=Hdiv)
        level = strata_level(Hdiv)
        ramified = any(fp.multiplicity > 1 for fp in fb)
        return level, ramified

    results = ctx.pmap(one, list(enumerate(_children(ss, K))))
    agree = sum(1 for level, ram in results if (level >= 1) == ram)
    rep.check("agreement", agree, K, "==")
    rep.details["in_stratum_1"] = sum(1 for level, _ in results if level >= 1)
    return rep


# ----------------------------------------------------------------------
# 4. analytic stack
# ----------------------------------------------------------------------

def _eisenstein(tau):
    q = np.exp(2j * np.pi * tau)
    e4 = 1 + 240 * sum(k ** 3 * q ** k / (1 - q ** k) for k in range(1, 80))
    e6 = 1 - 504 * sum(k ** 5 * q ** k / (1 - q ** k) for k in range(1, 80))
    return e4, e6


def _reduce_upper(tau):
    for _ in range(100):
        tau = tau - round(tau.real)
        if abs(tau) < 1 - 1e-14:
            tau = -1 / tau
        else:
            break
    return tau


def j_invariant(tau) -> complex:
    e4, e6 = _eisenstein(_reduce_upper(complex(tau)))
    return 1728 * e4 ** 3 / (e4 ** 3 - e6 ** 2)


def criterion_analytic(ctx: Context, ss) -> VerificationReport:
    rep = VerificationReport("criterion_4_analytic")
    pd = ctx.periods
    rep.check("tau_symmetry", pd.symmetry_residual, 1e-8)
    rep.check("min_eig_im_tau", pd.min_eig_im_tau, 0.0, ">=")
    ell = new_curve([0, -1, 0, 1])
    pe = compute_periods(ell, ctx.cfg.quad_nodes)
    rep.check("lemniscatic_j", abs(j_invariant(pe.tau[0, 0]) - 1728), 1e-6)
    systems = [multiple_g12(ctx.curve, 2), nonspecial_monomial(ctx.curve, 3, SELECTION_N3),
               nonspecial_monomial(ctx.curve, 4, SELECTION_N4)]
    K = ctx.counts["aj_cases"]

    def one(args):
        j, seed = args
        S = systems[j % len(systems)]
        D = section_divisor(S, random_hyperplane(S, seed)) - Divisor.from_pairs([(INFINITY, 2 * S.n)])
        return lattice_residual(pd, abel_jacobi(ctx.curve, pd, D).v)

    res = ctx.pmap(one, list(enumerate(_children(ss, K))))
    rep.check("principal_divisor_residual", max(res), 1e-8)
    exact = math.pi ** 0.25 / gamma(0.75)
    rep.check("theta_0_i", abs(theta(np.zeros(1), np.array([[1j]])) - exact), 1e-10)
    rep.details["tau"] = pd.tau
    return rep


# ----------------------------------------------------------------------
# 5. Gunning trisecants
# ----------------------------------------------------------------------

def _gunning_points(curve, ell, seed):
    pts = random_points(curve, 2 * ell - 2, seed)
    return pts[:ell], pts[ell:]


def criterion_trisecant(ctx: Context, ss) -> VerificationReport:
    rep = VerificationReport("criterion_5_trisecant", inputs={
        "rank_ratio": ctx.tol["rank_ratio"], "gap": ctx.tol["gap"]})
    pd, g = ctx.periods, ctx.periods.genus
    K, KC = ctx.counts["gunning_sets"], ctx.counts["control_sets"]
    s3, s4, sc = ss.spawn(3)

    def secant(args):
        ell, seed, k = args
        p, q = _gunning_points(ctx.curve, ell, seed)
        t = make_gunning(ctx.curve, pd, p, q, k)
        rel = max(relation_residuals(t, pd).values())
        _, gap, s = numerical_rank([kummer_vector(u.v, pd.tau, ctx.tol["abs_tol"]) for u in t.u],
                                   ctx.tol["rank_ratio"])
        return rel, float(s[ell - 1] / s[0]), gap

    for ell, sub in ((3, s3), (4, s4)):
        tasks = [(ell, seed, k) for seed in _children(sub, K) for k in range(4 ** g)]
        res = ctx.pmap(secant, tasks)
        rep.check(f"max_sigma_ratio[ell={ell}]", max(r[1] for r in res), ctx.tol["rank_ratio"])
        rep.check(f"min_gap[ell={ell}]", min(r[2] for r in res), ctx.tol["gap"], ">=")
        rep.check(f"max_relation_residual[ell={ell}]", max(r[0] for r in res), 1e-7)
        rep.details[f"cases[ell={ell}]"] = len(res)

    def control(seed):
        us = random_jacobian_points(pd, 3, seed)
        _, _, s = numerical_rank([kummer_vector(u.v, pd.tau, ctx.tol["abs_tol"]) for u in us])
        return float(s[2] / s[0])

    ctrl = ctx.pmap(control, _children(sc, KC))
    rep.check("min_control_sigma_ratio", min(ctrl), 1e-3, ">=")
    return rep


# ----------------------------------------------------------------------
# 6. reciprocal construction
# ----------------------------------------------------------------------

def reciprocal_cases(ctx: Context, ss):
    """(system, H, decomposition) for E = 0 on multiple_g12(2) and E = branch point on (3)."""
    K = ctx.counts["reciprocal_hyperplanes"]
    out = []
    S2, S3 = multiple_g12(ctx.curve, 2), multiple_g12(ctx.curve, 3)
    finite_branch = [p for p in ctx.curve.branch_points if p.is_finite]
    for j, seed in enumerate(_children(ss, 2 * K)):
        if j < K:
            H, dec = decomposition(S2, Divisor.zero(), seed)
            out.append((S2, H, dec))
        else:
            E = Divisor.from_points([finite_branch[seed[0] % len(finite_branch)]])
            H, dec = decomposition(S3, E, seed)
            out.append((S3, H, dec))
    return out


def _reciprocal_task(ctx, args):
    S, dec, sigma, k = args
    r = verify_reciprocal(S, dec, sigma, k, ctx.periods, ctx.tol["tol_proj"],
                          ctx.tol["rank_ratio"], ctx.tol["gap"], ctx.tol["tol_rank"],
                          ctx.tol["abs_tol"])
    mults = [c.value for c in r.checks if c.name.startswith("multiplicity")]
    return r.status, r.failing, mults


def criterion_reciprocal(ctx: Context, ss) -> VerificationReport:
    rep = VerificationReport("criterion_6_reciprocal")
    g = ctx.periods.genus
    tasks, labels = [], []
    for S, H, dec in reciprocal_cases(ctx, ss):
        parts = all_partitions(dec.P)
        rep.check(f"partitions[n={S.n},deg_E={dec.E.degree}]#{len(labels)}",
                  len(parts), math.comb(len(dec.P), dec.ell), "==")
        for sigma in parts:
            for k in range(4 ** g):
                tasks.append((S, dec, sigma, k))
                labels.append((S.n, dec.E.degree))
    res = ctx.pmap(lambda a: _reciprocal_task(ctx, a), tasks)
    for key in sorted(set(labels)):
        sub = [r for r, lab in zip(res, labels) if lab == key]
        rep.check(f"passing[n={key[0]},deg_E={key[1]}]",
                  sum(1 for r in sub if r[0] == PASS), len(sub), "==")
        want = 2 ** key[1]
        mults = [m for r in sub for m in r[2]]
        rep.check(f"multiplicity[n={key[0]},deg_E={key[1]}]",
                  sum(1 for m in mults if m == want), len(mults), "==")
    rep.details["failing"] = sorted({name for r in res for name in r[1]})
    return rep


# ----------------------------------------------------------------------
# 7. fiberstrat round trip
# ----------------------------------------------------------------------

def _has_involution_pair(D: Divisor) -> bool:
    pts = D.support
    for (a, ma), (b, mb) in itertools.combinations(pts, 2):
        if a.is_finite and b.is_finite and abs(a.x - b.x) <= 1e-9 * (1 + abs(a.x)) \
                and abs(a.y + b.y) <= 1e-9 * (1 + abs(a.y)):
            return True
    return any(m >= 2 and p.is_finite and abs(p.y) <= 1e-12 for p, m in pts)


def _fiberstrat_round_trip(ctx, S, dec):
    out = []
    for sigma in all_partitions(dec.P):
        t = gunning_from_partition(S, dec, sigma, 0, ctx.periods)
        r = verify_fiberstrat(t, dec.E, S, ctx.periods, ctx.tol["tol_proj"], ctx.tol["tol_rank"])
        levels = [c.value for c in r.checks if c.name == "strata_level"]
        forced = False
        if r.status == HYPOTHESIS_NOT_MET and S.deg_phi == 2:
            # phi identifies P and iota(P), so an x_i holding both is undefined
            undefined = r.details.get("undefined", [])
            forced = bool(undefined) and all(
                _has_involution_pair(Divisor.from_points([t.p[i]] + list(t.q)) + dec.E)
                for i in undefined)
        out.append((r.status, levels, forced))
    return out


def criterion_fiberstrat(ctx: Context, ss) -> VerificationReport:
    rep = VerificationReport("criterion_7_fiberstrat")
    s_rec, s_ns, s_bad = ss.spawn(3)
    # data of criterion 6
    rec = ctx.pmap(lambda c: _fiberstrat_round_trip(ctx, c[0], c[2]), reciprocal_cases(ctx, s_rec))
    flat = [x for r in rec for x in r]
    rep.check("criterion6_data_fail", sum(1 for s, _, _ in flat if s == "fail"), 0, "==")
    rep.check("criterion6_data_unforced_not_met",
              sum(1 for s, _, f in flat if s == HYPOTHESIS_NOT_MET and not f), 0, "==")
    rep.details["criterion6_statuses"] = sorted({s for s, _, _ in flat})
    # systems with a y-term, where every x_i can be defined
    S3 = nonspecial_monomial(ctx.curve, 3, SELECTION_N3)
    S4 = nonspecial_monomial(ctx.curve, 4, SELECTION_N4)

    def ns_case(args):
        j, seed = args
        z, w = random_points(ctx.curve, 2, (seed, 5))
        if j % 3 == 0:
            S, E = S3, Divisor.from_points([z])
        elif j % 3 == 1:
            S, E = S4, Divisor.from_pairs([(z, 2)])
        else:
            S, E = S4, Divisor.from_points([z, w])
        _, dec = decomposition(S, E, seed)
        return S.n, dec.E.degree, _fiberstrat_round_trip(ctx, S, dec)

    ns = ctx.pmap(ns_case, list(enumerate(_children(s_ns, 6))))
    total = sum(len(r[2]) for r in ns)
    passed = sum(1 for n, dE, res in ns for s, lv, _ in res
                 if s == PASS and lv and lv[0] >= n - 3 + 1)  # ell = 3
    rep.check("round_trip_pass", passed, total, "==")

    # random Gunning data: eta^2 is not O(2n inf)
    S2 = multiple_g12(ctx.curve, 2)

    def bad(seed):
        p, q = _gunning_points(ctx.curve, 3, seed)
        t = make_gunning(ctx.curve, ctx.periods, p, q, seed[0] % 4 ** ctx.periods.genus)
        return verify_fiberstrat(t, Divisor.zero(), S2, ctx.periods).status

    st = ctx.pmap(bad, _children(s_bad, 5))
    rep.check("incompatible_skipped", sum(1 for s in st if s == SKIPPED), len(st), "==")
    return rep


# ----------------------------------------------------------------------
# 8. eta independence and the Z_n family
# ----------------------------------------------------------------------

def criterion_eta(ctx: Context, ss) -> VerificationReport:
    rep = VerificationReport("criterion_8_eta")
    pd = ctx.periods
    K = ctx.counts["gunning_sets"]

    def one(args):
        j, seed = args
        ell = 3 + j % 2
        p, q = _gunning_points(ctx.curve, ell, seed)
        t = make_gunning(ctx.curve, pd, p, q, seed[0] % 4 ** pd.genus)
        worst = 0.0
        for deg in (0, 1, 2):
            E = Divisor.from_points(random_points(ctx.curve, deg, (seed, 10 + deg)))
            r = eta_independence(t, E, pd)
            worst = max(worst, r.checks[0].value)
        return worst

    s_tuples, s_family = ss.spawn(2)
    res = ctx.pmap(one, list(enumerate(_children(s_tuples, K))))
    rep.check("max_eta_residual", max(res), 1e-7)

    p, q = _gunning_points(ctx.curve, 3, seed_of(s_family))
    t = make_gunning(ctx.curve, pd, p, q, 0)
    count = ctx.counts["zfamily_samples"]
    flat = z_family_sample(t, 2, 3, 0, pd)
    rep.check("zero_dim_spread", max(lattice_residual(pd, a.v - b.v)
                                     for a, b in itertools.combinations(flat, 2)), 1e-7)
    for n in (3, 4):
        samples = z_family_sample(t, n, count, n, pd)
        sep = min(lattice_residual(pd, a.v - b.v) for a, b in itertools.combinations(samples, 2))
        rep.check(f"min_separation[n={n}]", sep, 1e-6, ">=")
        rep.check(f"dimension[n={n}]", z_family_dimension(t, n, pd, seed=n), n - 2, "==")
    return rep


CRITERIA = [
    criterion_fiber_degree,
    criterion_multiplicity,
    criterion_strata,
    criterion_analytic,
    criterion_trisecant,
    criterion_reciprocal,
    criterion_fiberstrat,
    criterion_eta,
]


def make_context(cfg, pmap=None) -> Context:
    curve = cfg.curve()
    if curve.genus != 2:
        raise MultisecantError("the acceptance battery is defined for genus-2 curves")
    periods = compute_periods(curve, cfg.quad_nodes)
    return Context(cfg, curve, periods, pmap or (lambda fn, xs: [fn(x) for x in xs]))


def run_criterion(ctx: Context, index: int) -> VerificationReport:
    """Criterion `index` (1-based) with its own seed stream."""
    root = np.random.SeedSequence(ctx.cfg.seed)
    ss = root.spawn(len(CRITERIA))[index - 1]
    return CRITERIA[index - 1](ctx, ss)


def run_suite(ctx: Context) -> list:
    return [run_criterion(ctx, i + 1) for i in range(len(CRITERIA))]
