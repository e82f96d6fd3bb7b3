import json
import math

import numpy as np
import pytest

from multisecant.config import ConfigError, default_config, from_dict, resolve_point
from multisecant.report import (
    FAIL, HYPOTHESIS_NOT_MET, PASS, SKIPPED, VerificationReport, encode, envelope,
)


def test_check_operators():
    r = VerificationReport("x")
    assert r.check("a", 1e-9, 1e-8)
    assert r.check("b", 5, 3, ">=")
    assert not r.check("c", 2, 3, "==")
    assert r.status == FAIL and r.failing == ["c"]
    with pytest.raises(ValueError):
        r.check("d", 1, 1, "<")


def test_forced_outcomes_do_not_fail_the_envelope():
    ok = VerificationReport("ok")
    ok.check("a", 0, 1)
    skip = VerificationReport("skip", outcome=SKIPPED)
    hyp = VerificationReport("hyp", outcome=HYPOTHESIS_NOT_MET)
    doc = envelope("cmd", "0", {}, 1, [ok, skip, hyp])
    assert doc["status"] == PASS
    assert doc["statuses"] == [PASS, SKIPPED, HYPOTHESIS_NOT_MET]
    bad = VerificationReport("bad")
    bad.check("z", 2, 1)
    doc = envelope("cmd", "0", {}, 1, [ok, bad])
    assert doc["status"] == FAIL and doc["failing_checks"] == ["bad:z"]


def test_encoding_round_trips_doubles():
    values = [0.1, 1 / 3, math.pi * 1e-17, 2.0 ** -1074, 1.7976931348623157e308]
    back = json.loads(encode(values))
    assert back == values


def test_encoding_special_values():
    doc = json.loads(encode({"c": 1 + 2j, "n": float("nan"), "i": -np.inf,
                             "a": np.array([[1, 2], [3, 4]]), "b": np.bool_(True)}))
    assert doc == {"c": [1.0, 2.0], "n": "nan", "i": "-inf", "a": [[1, 2], [3, 4]], "b": True}


def test_encoding_is_deterministic():
    obj = {"z": [1.5, 2j], "a": {"k": 1}}
    assert encode(obj) == encode(obj)
    assert list(json.loads(encode(obj))) == ["z", "a"]


def test_default_config():
    cfg = default_config()
    assert cfg.curve().genus == 2
    assert cfg.system == {"kind": "multiple_g12", "n": 2, "selection": None}
    assert cfg.tolerances["rank_ratio"] == 1e-7
    assert cfg.suite_counts["strata_hyperplanes"] == 50


BASE = {"curve": {"f": [0, 24, -50, 35, -10, 1]}}


@pytest.mark.parametrize("raw", [
    {"curve": {"f": [1, 0, 0, 0, 1]}},                       # even degree
    {"curve": {"f": [0, 0, -6, 11, -6, 1]}},                 # repeated root
    {**BASE, "colour": 1},                                   # unknown key
    {**BASE, "tolerances": {"tol_rank": -1}},
    {**BASE, "tolerances": {"tol_nonsense": 1}},
    {**BASE, "system": {"kind": "pencil", "n": 2}},
    {**BASE, "system": {"kind": "nonspecial_monomial", "n": 3}},
    {**BASE, "params": {"ell": 2}},
    {**BASE, "params": {"p": [{"y": 1}]}},
    {**BASE, "params": {"suite": {"fiber_hyperplanes": 0}}},
    {**BASE, "seed": -1},
    {"curve": {"f": ["1/0", 1, 1, 1]}},
])
def test_malformed_configs(raw):
    with pytest.raises(ConfigError):
        from_dict(raw)


def test_rational_coefficients_in_config():
    cfg = from_dict({"curve": {"f": ["-1/2", [3, 4], 0, 1]}})
    assert cfg.f == [[-1, 2], [3, 4], [0, 1], [1, 1]]


def test_point_specs():
    cfg = default_config()
    c = cfg.curve()
    assert resolve_point(c, "inf").at_infinity
    assert abs(resolve_point(c, {"branch": 2}).x - 2) < 1e-12
    p = resolve_point(c, {"x": [0.5, 0.1], "sheet": -1})
    assert c.on_curve(p) and p.x == 0.5 + 0.1j
    assert resolve_point(c, {"random": 3}) == resolve_point(c, {"random": 3})
    with pytest.raises(ConfigError):
        resolve_point(c, {"branch": 7})
