"""Verification reports and their JSON encoding.

Numbers are written with 17 significant digits, complex numbers as
[re, im], and non-finite floats as the strings "inf", "-inf", "nan".
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

SCHEMA = 1

PASS = "pass"
FAIL = "fail"
HYPOTHESIS_NOT_MET = "hypothesis_not_met"
SKIPPED = "skipped"

HALFPERIOD_ENCODING = (
    "index k -> h = (m + tau n)/2 with m_j = bit j of k and n_j = bit g+j of k, j = 0..g-1"
)


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    op: str  # "<=", ">=", "=="
    passed: bool


@dataclass
class VerificationReport:
    name: str
    inputs: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    outcome: Optional[str] = None  # forced outcome: skipped / hypothesis_not_met

    def check(self, name, value, threshold, op="<="):
        if op == "<=":
            ok = value <= threshold
        elif op == ">=":
            ok = value >= threshold
        elif op == "==":
            ok = value == threshold
        else:
            raise ValueError(f"unknown comparison {op!r}")
        self.checks.append(Check(name, value, threshold, op, bool(ok)))
        return bool(ok)

    @property
    def status(self) -> str:
        if self.outcome is not None:
            return self.outcome
        return PASS if all(c.passed for c in self.checks) else FAIL

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def failing(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "passed": self.passed,
            "inputs": self.inputs,
            "checks": [dataclasses.asdict(c) for c in self.checks],
            "details": self.details,
        }


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def encode(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON text; dict keys keep insertion order."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, VerificationReport):
        obj = obj.to_dict()
    elif dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return encode([float(obj.real), float(obj.imag)], indent, _level)
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {encode(v, indent, _level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [encode(v, indent, _level + 1) for v in obj]
        if all("\n" not in p for p in parts) and sum(len(p) for p in parts) < 100:
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(pad + p for p in parts) + "\n" + end + "]"
    if hasattr(obj, "v"):  # JacPoint
        return encode(obj.v, indent, _level)
    raise TypeError(f"cannot encode {type(obj).__name__}")


def envelope(command: str, version: str, config: dict, seed: int, reports: list,
             extra: Optional[dict] = None) -> dict:
    """Top-level report; it fails iff some sub-report failed.

    Skipped and hypothesis_not_met sub-reports are outcomes, not failures.
    """
    statuses = [r.status for r in reports]
    failing = [f"{r.name}:{c}" for r in reports for c in r.failing]
    out = {
        "schema": SCHEMA,
        "tool": "multisecant",
        "version": version,
        "command": command,
        "seed": seed,
        "halfperiod_encoding": HALFPERIOD_ENCODING,
        "config": config,
        "status": FAIL if any(r.status == FAIL for r in reports) else PASS,
        "statuses": statuses,
        "failing_checks": failing,
        "reports": [r.to_dict() for r in reports],
    }
    if extra:
        out.update(extra)
    return out
