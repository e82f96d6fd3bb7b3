"""Command-line entry point: `multisecant <command> --config run.json`.

Every invocation prints one JSON report (see report.envelope).  Exit codes:
0 when no sub-report failed, 1 on a failed check or numerical error, 2 on a
configuration error (no report is written).

Seed streams: SeedSequence(seed).spawn(4) gives, in order, the streams for
random points, random hyperplanes, census perturbations and control/sample
draws.  The suite uses its own per-criterion spawning (see suite.py).
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import (
    RunConfig, default_config, load, parse_complex, resolve_divisor, resolve_point,
)
from .constructions import decomposition, random_hyperplane, random_points
from .curve import Divisor
from .errors import ConfigError, MultisecantError
from .gunning import (
    HDecomposition, PartitionSigma, all_partitions, eta_independence, gunning_from_partition,
    make_gunning, relation_residuals, verify_fiberstrat, verify_gunning_secant,
    verify_reciprocal, z_family_dimension, z_family_sample,
)
from .linser import (
    Hyperplane, canonical, census_counts, census_distance, census_lookup, fiber,
    generic_fiber_degree, multiple_g12, nonspecial_monomial, section_divisor, strata_level,
)
from .periods import compute_periods, lattice_residual
from .report import FAIL, PASS, VerificationReport, encode, envelope
from .suite import make_context, run_suite
from .theta import ThetaChar, riemann_constant, theta_reduced

COMMANDS = ["periods", "theta", "fiber", "mult", "strata", "gunning", "reciprocal",
            "fiberstrat", "zfamily", "suite"]


class Run:
    """Resolved inputs shared by the command handlers."""

    def __init__(self, cfg: RunConfig, args, pmap):
        self.cfg = cfg
        self.args = args
        self.pmap = pmap
        self.curve = cfg.curve()
        streams = np.random.SeedSequence(cfg.seed).spawn(4)
        self.seeds = {name: tuple(int(v) for v in s.generate_state(2))
                      for name, s in zip(("points", "hyperplanes", "census", "samples"), streams)}
        self._periods = None

    @property
    def tol(self):
        return self.cfg.tolerances

    @property
    def params(self):
        return self.cfg.params

    def periods(self, quad_nodes=None):
        if self._periods is None or quad_nodes:
            self._periods = compute_periods(self.curve, quad_nodes or self.cfg.quad_nodes)
        return self._periods

    def system(self):
        spec = self.cfg.system
        try:
            if spec["kind"] == "multiple_g12":
                return multiple_g12(self.curve, spec["n"])
            if spec["kind"] == "canonical":
                return canonical(self.curve)
            return nonspecial_monomial(self.curve, spec["n"], spec["selection"])
        except (MultisecantError, ValueError) as exc:
            raise ConfigError(f"system: {exc}") from exc

    def hyperplane(self, S):
        if "H" in self.params:
            c = [parse_complex(v) for v in self.params["H"]]
            if len(c) != S.n + 1:
                raise ConfigError(f"params.H needs {S.n + 1} coefficients")
            if not any(c):
                raise ConfigError("params.H is the zero vector")
            return Hyperplane.from_vector(c)
        return random_hyperplane(S, self.seeds["hyperplanes"])

    def halfperiods(self, default="all"):
        hp = self.params.get("halfperiods", default)
        g = self.curve.genus
        if hp == "all":
            return list(range(4 ** g))
        bad = [k for k in hp if k >= 4 ** g]
        if bad:
            raise ConfigError(f"half-period indices {bad} exceed {4 ** g - 1}")
        return list(hp)

    def gunning_points(self):
        p, q = self.params.get("p"), self.params.get("q")
        if p is not None or q is not None:
            if p is None or q is None:
                raise ConfigError("params.p and params.q go together")
            return ([resolve_point(self.curve, s) for s in p],
                    [resolve_point(self.curve, s) for s in q])
        ell = self.params.get("ell", 3)
        pts = random_points(self.curve, 2 * ell - 2, self.seeds["points"])
        return pts[:ell], pts[ell:]

    def E(self):
        return resolve_divisor(self.curve, self.params.get("E", []))


def _divisor_json(D: Divisor):
    return [{"x": "inf"} if p.at_infinity else {"x": p.x, "y": p.y, "m": m}
            for p, m in D.support]


# ----------------------------------------------------------------------
# handlers: each returns (reports, extra top-level fields)
# ----------------------------------------------------------------------

def cmd_periods(run: Run):
    pd = run.periods(run.args.quad_nodes)
    rep = VerificationReport("periods", inputs={"quad_nodes": pd.quad_nodes})
    rep.check("symmetry_residual", pd.symmetry_residual, 1e-8)
    rep.check("min_eig_im_tau", pd.min_eig_im_tau, 0.0, ">=")
    rep.details.update({
        "A": pd.A, "B": pd.B, "tau": pd.tau, "condition_A": pd.condition_A,
        "branch_points": pd.branch, "flagged": pd.flagged, "base_point": pd.base_point,
    })
    k, residuals = riemann_constant(pd, seed=run.seeds["samples"], abs_tol=run.tol["abs_tol"])
    rep.details["riemann_constant"] = {"halfperiod": k, "theta_residuals": residuals}
    return [rep], {}


def _read_tau(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        rows = doc["reports"][0]["details"]["tau"]
        return np.array([[complex(a, b) for a, b in row] for row in rows])
    except (OSError, KeyError, IndexError, TypeError, ValueError) as exc:
        raise ConfigError(f"--tau-from {path}: not a periods report ({exc})") from exc


def cmd_theta(run: Run):
    a = run.args
    tau = _read_tau(a.tau_from) if a.tau_from else run.periods().tau
    g = tau.shape[0]
    if a.z:
        z = np.array([parse_complex(t, "--z") for t in a.z.split(",")])
    elif "z" in run.params:
        z = np.array([parse_complex(t, "params.z") for t in run.params["z"]])
    else:
        z = np.zeros(g, dtype=complex)
    if len(z) != g:
        raise ConfigError(f"z has {len(z)} entries, tau is {g}x{g}")
    text = a.char or run.params.get("char")
    try:
        char = ThetaChar.parse(text) if text else ThetaChar.zero(g)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if len(char.a) != g:
        raise ConfigError("characteristic length differs from the genus")
    tol = a.tol or run.tol["abs_tol"]
    lf, val = theta_reduced(z, tau, char, tol)
    rep = VerificationReport("theta", inputs={"z": z, "char": text or "0", "abs_tol": tol})
    rep.details.update({"value": complex(np.exp(lf) * val), "log_factor": lf,
                        "reduced_value": val, "parity": char.parity})
    return [rep], {}


def cmd_fiber(run: Run):
    S = run.system()
    H = run.hyperplane(S)
    Hdiv = section_divisor(S, H)
    fb = fiber(S, H, run.tol["tol_rank"], Hdiv=Hdiv)
    level = strata_level(Hdiv)
    want = generic_fiber_degree(S)
    rep = VerificationReport("fiber", inputs={"H": H.vector, "system": repr(S)})
    total = sum(fp.multiplicity for fp in fb)
    if level == 0:
        rep.check("fiber_count", len(fb), want, "==")
        rep.check("total_multiplicity", total, want, "==")
    rep.details.update({
        "generic_degree": want, "strata_level": level, "count": len(fb),
        "total_multiplicity": total, "section_divisor": _divisor_json(Hdiv),
        "fiber": [{"divisor": _divisor_json(fp.divisor), "multiplicity": fp.multiplicity}
                  for fp in fb],
    })
    return [rep], {}


def cmd_mult(run: Run):
    S = run.system()
    H = run.hyperplane(S)
    Hdiv = section_divisor(S, H)
    fb = fiber(S, H, run.tol["tol_rank"], Hdiv=Hdiv)
    if "F" in run.params:
        F = resolve_divisor(run.curve, run.params["F"])
        if F.degree != S.n:
            raise ConfigError(f"params.F must have degree n = {S.n}")
        targets = [fp for fp in fb if census_distance(S.curve, fp.divisor, F) <= 1e-6]
        if not targets:
            rep = VerificationReport("mult", inputs={"H": H.vector})
            rep.check("F_in_fiber", 0, 1, "==")
            return [rep], {}
    else:
        targets = fb
    cands, counts = census_counts(S, H, run.tol["census_eps"], run.seeds["census"],
                                  tol_rank=run.tol["tol_rank"], Hdiv=Hdiv)
    reps = []
    for fp in targets:
        rep = VerificationReport("mult", inputs={
            "H": H.vector, "F": _divisor_json(fp.divisor), "census_eps": run.tol["census_eps"]})
        census = census_lookup(S.curve, cands, counts, fp.divisor)
        rep.check("census_equals_combinatorial", census, fp.multiplicity, "==")
        rep.details["multiplicity"] = fp.multiplicity
        reps.append(rep)
    return reps, {}


def cmd_strata(run: Run):
    S = run.system()
    H = run.hyperplane(S)
    Hdiv = section_divisor(S, H)
    fb = fiber(S, H, run.tol["tol_rank"], Hdiv=Hdiv)
    level = strata_level(Hdiv)
    ramified = any(fp.multiplicity > 1 for fp in fb)
    rep = VerificationReport("strata", inputs={"H": H.vector})
    rep.check("stratum_iff_ramified", int((level >= 1) == ramified), 1, "==")
    rep.details.update({"strata_level": level, "in_branch_locus": level >= 1,
                        "multiplicities": [fp.multiplicity for fp in fb],
                        "section_divisor": _divisor_json(Hdiv)})
    return [rep], {}


def _tuple_json(t):
    return {"ell": t.ell, "halfperiod": t.halfperiod,
            "p": [[pt.x, pt.y] for pt in t.p], "q": [[pt.x, pt.y] for pt in t.q],
            "u": [u.v for u in t.u]}


def cmd_gunning(run: Run):
    pd = run.periods()
    p, q = run.gunning_points()
    hps = run.halfperiods(default=[0])
    tuples = run.pmap(lambda k: make_gunning(run.curve, pd, p, q, k), hps)
    if run.args.action == "make":
        reps = []
        for t in tuples:
            rep = VerificationReport("gunning_make", inputs={"halfperiod": t.halfperiod})
            for name, v in relation_residuals(t, pd).items():
                rep.check(f"relation_{name}", v, 1e-7)
            rep.details["tuple"] = _tuple_json(t)
            reps.append(rep)
        return reps, {}
    reps = run.pmap(lambda t: verify_gunning_secant(
        t, pd, run.tol["rank_ratio"], run.tol["gap"], seed=run.seeds["samples"],
        abs_tol=run.tol["abs_tol"]), tuples)
    return reps, {}


def _decomposition(run: Run, S):
    E = run.E()
    if "H" in run.params:
        H = run.hyperplane(S)
        return H, HDecomposition.from_section(S, H, E)
    return decomposition(S, E, run.seeds["hyperplanes"])


def _partitions(run: Run, dec):
    parts = run.params.get("partitions", "all")
    if parts == "all":
        return all_partitions(dec.P)
    out = []
    for sub in parts:
        if len(sub) != dec.ell or len(set(sub)) != len(sub) or max(sub) >= len(dec.P):
            raise ConfigError(f"partition {sub} is not an {dec.ell}-subset of 0..{len(dec.P) - 1}")
        out.append(PartitionSigma(tuple(dec.P), tuple(sorted(sub))))
    return out


def cmd_reciprocal(run: Run):
    S = run.system()
    pd = run.periods()
    H, dec = _decomposition(run, S)
    tasks = [(sigma, k) for sigma in _partitions(run, dec) for k in run.halfperiods()]
    reps = run.pmap(lambda a: verify_reciprocal(
        S, dec, a[0], a[1], pd, run.tol["tol_proj"], run.tol["rank_ratio"], run.tol["gap"],
        run.tol["tol_rank"], run.tol["abs_tol"]), tasks)
    return reps, {"hyperplane": H.vector, "section_divisor": _divisor_json(dec.divisor)}


def cmd_fiberstrat(run: Run):
    S = run.system()
    pd = run.periods()
    if "p" in run.params:
        p, q = run.gunning_points()
        E = run.E()
        tuples = run.pmap(lambda k: make_gunning(run.curve, pd, p, q, k),
                          run.halfperiods(default=[0]))
        reps = run.pmap(lambda t: verify_fiberstrat(t, E, S, pd, run.tol["tol_proj"],
                                                    run.tol["tol_rank"]), tuples)
        return reps, {}
    H, dec = _decomposition(run, S)
    tasks = [(sigma, k) for sigma in _partitions(run, dec) for k in run.halfperiods(default=[0])]

    def one(a):
        t = gunning_from_partition(S, dec, a[0], a[1], pd)
        return verify_fiberstrat(t, dec.E, S, pd, run.tol["tol_proj"], run.tol["tol_rank"])

    return run.pmap(one, tasks), {"hyperplane": H.vector}


def cmd_zfamily(run: Run):
    pd = run.periods()
    p, q = run.gunning_points()
    t = make_gunning(run.curve, pd, p, q, run.halfperiods(default=[0])[0])
    n = run.params.get("n", t.ell)
    if n < t.ell - 1:
        raise ConfigError(f"params.n must be >= ell - 1 = {t.ell - 1}")
    count = run.params.get("count", 10)
    if count < 2:
        raise ConfigError("params.count must be >= 2")
    seed = run.seeds["samples"]
    etas = z_family_sample(t, n, count, seed, pd)
    rep = VerificationReport("zfamily", inputs={"ell": t.ell, "n": n, "count": count})
    dists = [lattice_residual(pd, a.v - b.v) for i, a in enumerate(etas) for b in etas[i + 1:]]
    if n == t.ell - 1:
        rep.check("max_spread", max(dists), 1e-7)
    else:
        rep.check("min_separation", min(dists), 1e-6, ">=")
    k = n - t.ell + 1
    dim = z_family_dimension(t, n, pd, seed=seed)
    if k <= pd.genus:
        rep.check("dimension", dim, k, "==")
    ind = eta_independence(t, Divisor.from_points(random_points(run.curve, k, seed)), pd)
    rep.check("eta_independence", ind.checks[0].value, 1e-7)
    rep.details.update({"eta": [e.v for e in etas], "dimension": dim})
    return [rep], {"tuple": _tuple_json(t)}


def cmd_suite(run: Run):
    try:
        ctx = make_context(run.cfg, run.pmap)
    except MultisecantError as exc:
        raise ConfigError(str(exc)) from exc
    return run_suite(ctx), {}


HANDLERS = {
    "periods": cmd_periods, "theta": cmd_theta, "fiber": cmd_fiber, "mult": cmd_mult,
    "strata": cmd_strata, "gunning": cmd_gunning, "reciprocal": cmd_reciprocal,
    "fiberstrat": cmd_fiberstrat, "zfamily": cmd_zfamily, "suite": cmd_suite,
}


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=argparse.SUPPRESS,
                   help="JSON run configuration (default: the shipped genus-2 config)")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the config seed")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads")
    p.add_argument("--out", default=argparse.SUPPRESS, help="write the report here, not stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="multisecant", parents=[common],
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("periods", parents=[common], help="period matrices and tau")
    p.add_argument("--quad-nodes", type=int, default=None)
    p = sub.add_parser("theta", parents=[common], help="evaluate a theta function")
    p.add_argument("--z", default=None, help="comma-separated complex entries, e.g. 0.1+0.2j,0")
    p.add_argument("--tau-from", default=None, help="a periods report to read tau from")
    p.add_argument("--char", default=None, help="characteristic 'a1,..;b1,..' in {0, 1/2}")
    p.add_argument("--tol", type=float, default=None, help="absolute truncation tolerance")
    sub.add_parser("fiber", parents=[common], help="fiber of xi over a hyperplane")
    sub.add_parser("mult", parents=[common], help="multiplicities against the census")
    sub.add_parser("strata", parents=[common], help="strata level and branch locus")
    p = sub.add_parser("gunning", parents=[common], help="Gunning multisecant tuples")
    p.add_argument("action", choices=["make", "verify"])
    sub.add_parser("reciprocal", parents=[common], help="reciprocal construction")
    sub.add_parser("fiberstrat", parents=[common], help="strata check for the image of Gunning data")
    sub.add_parser("zfamily", parents=[common], help="sample the eta family")
    sub.add_parser("suite", parents=[common], help="the full acceptance battery")
    return parser


def _emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load(args.config) if getattr(args, "config", None) else default_config()
        seed = getattr(args, "seed", None)
        if seed is not None:
            if not 0 <= seed < 2 ** 64:
                raise ConfigError("--seed must be a 64-bit unsigned integer")
            cfg.seed = seed
        threads = getattr(args, "threads", 1)
        if threads < 1:
            raise ConfigError("--threads must be >= 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out = getattr(args, "out", None)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    pmap = (lambda fn, xs: list(pool.map(fn, xs))) if pool else (lambda fn, xs: [fn(x) for x in xs])
    try:
        reps, extra = HANDLERS[args.command](Run(cfg, args, pmap))
        error = None
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (MultisecantError, ValueError, np.linalg.LinAlgError) as exc:
        reps, extra = [], {}
        error = {"type": type(exc).__name__, "message": str(exc)}
    finally:
        if pool:
            pool.shutdown()

    command = args.command + (f" {args.action}" if args.command == "gunning" else "")
    doc = envelope(command, __version__, cfg.to_dict(), cfg.seed, reps, extra)
    if error:
        doc["status"] = FAIL
        doc["error"] = error
    doc["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    _emit(encode(doc) + "\n", out)
    return 0 if doc["status"] == PASS else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
