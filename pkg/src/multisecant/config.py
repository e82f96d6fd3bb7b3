"""Run configuration: JSON loading, validation and defaults."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from .curve import INFINITY, CurvePoint, Divisor, HyperellipticCurve, new_curve, random_point
from .errors import ConfigError, MultisecantError

TOLERANCE_DEFAULTS = {
    "tol_point": 1e-9,
    "tol_rank": 1e-8,
    "tol_proj": 1e-7,
    "abs_tol": 1e-12,
    "rank_ratio": 1e-7,
    "gap": 1e3,
    "census_eps": 1e-5,
}

SUITE_DEFAULTS = {
    "fiber_hyperplanes": 20,
    "census_hyperplanes": 10,
    "strata_hyperplanes": 50,
    "gunning_sets": 10,
    "control_sets": 10,
    "aj_cases": 20,
    "reciprocal_hyperplanes": 2,
    "zfamily_samples": 10,
}

PARAM_KEYS = {
    "ell", "halfperiods", "partitions", "E", "H", "F", "p", "q", "count", "n",
    "z", "char", "suite",
}

TOP_KEYS = {"curve", "system", "tolerances", "quad_nodes", "seed", "params"}
SYSTEM_KEYS = {"kind", "n", "selection"}
KINDS = {"multiple_g12", "canonical", "nonspecial_monomial"}


@dataclass
class RunConfig:
    f: list
    system: dict
    tolerances: dict
    quad_nodes: int
    seed: int
    params: dict

    def to_dict(self) -> dict:
        return {
            "curve": {"f": self.f},
            "system": self.system,
            "tolerances": self.tolerances,
            "quad_nodes": self.quad_nodes,
            "seed": self.seed,
            "params": self.params,
        }

    def curve(self) -> HyperellipticCurve:
        return new_curve(self.f)

    @property
    def suite_counts(self) -> dict:
        out = dict(SUITE_DEFAULTS)
        out.update(self.params.get("suite", {}))
        return out


def _unknown(section, given, allowed):
    extra = sorted(set(given) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(extra)}")


def _int(value, name, lo=None, hi=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer")
    if lo is not None and value < lo or hi is not None and value > hi:
        raise ConfigError(f"{name} = {value} is out of range")
    return value


def _coeff(c, name):
    if isinstance(c, bool):
        raise ConfigError(f"{name}: bad coefficient {c!r}")
    if isinstance(c, int):
        return [c, 1]
    if isinstance(c, str):
        try:
            fr = Fraction(c)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{name}: bad coefficient {c!r}") from exc
        return [fr.numerator, fr.denominator]
    if isinstance(c, list) and len(c) == 2 and all(isinstance(v, int) and not isinstance(v, bool)
                                                 for v in c):
        if c[1] == 0:
            raise ConfigError(f"{name}: zero denominator")
        return list(c)
    raise ConfigError(f"{name}: coefficients are [num, den] pairs, integers or 'p/q' strings")


def parse_complex(value, name="value") -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"{name}: not a number")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", "").replace("i", "j"))
        except ValueError:
            pass
    raise ConfigError(f"{name}: expected a number, [re, im] or 'a+bj'")


def _check_point_spec(spec, name):
    if spec == "inf":
        return
    if not isinstance(spec, dict):
        raise ConfigError(f"{name}: point is 'inf' or an object")
    keys = set(spec)
    if keys <= {"x", "sheet"} and "x" in keys:
        parse_complex(spec["x"], name)
        if spec.get("sheet", 1) not in (1, -1):
            raise ConfigError(f"{name}: sheet is 1 or -1")
    elif keys == {"branch"}:
        _int(spec["branch"], name, 0)
    elif keys == {"random"}:
        _int(spec["random"], name, 0)
    else:
        raise ConfigError(f"{name}: point keys are x/sheet, branch or random")


def resolve_point(curve, spec) -> CurvePoint:
    """'inf', {'x': .., 'sheet': +-1}, {'branch': i} or {'random': seed}."""
    if spec == "inf":
        return INFINITY
    if "branch" in spec:
        finite = [p for p in curve.branch_points if p.is_finite]
        if spec["branch"] >= len(finite):
            raise ConfigError(f"branch index {spec['branch']} out of range")
        return finite[spec["branch"]]
    if "random" in spec:
        return random_point(curve, spec["random"])
    return curve.point_from_x(parse_complex(spec["x"]), spec.get("sheet", 1))


def resolve_divisor(curve, specs) -> Divisor:
    return Divisor.from_points([resolve_point(curve, s) for s in specs])


def _validate_params(params):
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    _unknown("params", params, PARAM_KEYS)
    if "ell" in params:
        _int(params["ell"], "params.ell", 3)
    for key in ("count", "n"):
        if key in params:
            _int(params[key], f"params.{key}", 0)
    if "halfperiods" in params:
        hp = params["halfperiods"]
        if hp != "all":
            if not isinstance(hp, list):
                raise ConfigError("params.halfperiods is 'all' or a list")
            for k in hp:
                _int(k, "params.halfperiods[]", 0)
    if "partitions" in params:
        parts = params["partitions"]
        if parts != "all":
            if not isinstance(parts, list):
                raise ConfigError("params.partitions is 'all' or a list of index lists")
            for sub in parts:
                if not isinstance(sub, list):
                    raise ConfigError("params.partitions entries are index lists")
                for k in sub:
                    _int(k, "params.partitions[][]", 0)
    for key in ("E", "F", "p", "q"):
        if key in params:
            if not isinstance(params[key], list):
                raise ConfigError(f"params.{key} must be a list of points")
            for i, s in enumerate(params[key]):
                _check_point_spec(s, f"params.{key}[{i}]")
    for key in ("H", "z"):
        if key in params:
            if not isinstance(params[key], list) or not params[key]:
                raise ConfigError(f"params.{key} must be a non-empty list of numbers")
            for i, v in enumerate(params[key]):
                parse_complex(v, f"params.{key}[{i}]")
    if "char" in params and not isinstance(params["char"], str):
        raise ConfigError("params.char must be a string 'a1,..;b1,..'")
    if "suite" in params:
        if not isinstance(params["suite"], dict):
            raise ConfigError("params.suite must be an object")
        _unknown("params.suite", params["suite"], SUITE_DEFAULTS)
        for k, v in params["suite"].items():
            _int(v, f"params.suite.{k}", 1)


def from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("the configuration must be a JSON object")
    _unknown("config", raw, TOP_KEYS)
    curve = raw.get("curve")
    if not isinstance(curve, dict) or "f" not in curve:
        raise ConfigError("curve.f is required")
    _unknown("curve", curve, {"f"})
    if not isinstance(curve["f"], list) or len(curve["f"]) < 4:
        raise ConfigError("curve.f must list at least 4 coefficients")
    f = [_coeff(c, f"curve.f[{i}]") for i, c in enumerate(curve["f"])]
    try:
        new_curve(f)
    except MultisecantError as exc:
        raise ConfigError(f"curve.f: {exc}") from exc

    system = dict(raw.get("system", {"kind": "multiple_g12", "n": 2}))
    _unknown("system", system, SYSTEM_KEYS)
    if system.get("kind") not in KINDS:
        raise ConfigError(f"system.kind must be one of {sorted(KINDS)}")
    if system["kind"] != "canonical":
        _int(system.get("n"), "system.n", 1)
    if system["kind"] == "nonspecial_monomial":
        sel = system.get("selection")
        if not isinstance(sel, list):
            raise ConfigError("system.selection is required for nonspecial_monomial")
        for k in sel:
            _int(k, "system.selection[]", 0)
    elif "selection" in system and system["selection"] is not None:
        raise ConfigError("system.selection only applies to nonspecial_monomial")
    system.setdefault("selection", None)
    system.setdefault("n", None)

    tol = dict(TOLERANCE_DEFAULTS)
    given = raw.get("tolerances", {})
    if not isinstance(given, dict):
        raise ConfigError("tolerances must be an object")
    _unknown("tolerances", given, TOLERANCE_DEFAULTS)
    for k, v in given.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError(f"tolerances.{k} must be a positive number")
        tol[k] = float(v)

    quad = _int(raw.get("quad_nodes", 256), "quad_nodes", 8, 100000)
    seed = _int(raw.get("seed", 0), "seed", 0, 2 ** 64 - 1)
    params = copy.deepcopy(raw.get("params", {}))
    _validate_params(params)
    return RunConfig(f, system, tol, quad, seed, params)


def load(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return from_dict(raw)


def default_config() -> RunConfig:
    text = resources.files("multisecant").joinpath("data/default_genus2.json").read_text()
    return from_dict(json.loads(text))
