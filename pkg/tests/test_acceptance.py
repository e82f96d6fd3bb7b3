"""Acceptance criteria 1-9, each at its stated tolerance.

Every test prints one line "criterion k: PASS|FAIL ..." and the lines are
repeated in the pytest terminal summary.  Run directly with
`python tests/test_acceptance.py` to get only those lines.
"""

import json
import sys

import pytest

from multisecant.cli import run as cli_run
from multisecant.config import default_config
from multisecant.suite import make_context, run_criterion

from conftest import ACCEPTANCE_LINES

TITLES = {
    1: "fiber-degree law",
    2: "multiplicity law (census)",
    3: "strata / branch consistency",
    4: "analytic stack soundness",
    5: "Gunning trisecants and quadrisecants",
    6: "reciprocal construction end to end",
    7: "fiberstrat round trip",
    8: "eta independence and the Z-family",
    9: "determinism across thread counts",
}


def record(k, ok, detail=""):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {TITLES[k]}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture(scope="module")
def ctx():
    return make_context(default_config())


def summarize(rep):
    if rep.passed:
        return ", ".join(f"{c.name}={c.value:.3g}" for c in rep.checks[:3])
    return "failing: " + ", ".join(rep.failing)


@pytest.mark.parametrize("k", range(1, 9))
def test_criterion(ctx, k):
    rep = run_criterion(ctx, k)
    record(k, rep.passed, summarize(rep))
    assert rep.passed, rep.failing


def _suite_doc(tmp_path, threads):
    out = tmp_path / f"suite_{threads}.json"
    code = cli_run(["suite", "--threads", str(threads), "--out", str(out)])
    doc = json.loads(out.read_text())
    doc.pop("timestamp")
    return code, doc


def test_criterion_9_determinism(tmp_path):
    code1, a = _suite_doc(tmp_path, 1)
    code4, b = _suite_doc(tmp_path, 4)
    same = a == b
    ok = same and code1 == code4 == 0
    record(9, ok, f"exit codes {code1}/{code4}, reports {'identical' if same else 'differ'}")
    assert same
    assert code1 == code4 == 0


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
