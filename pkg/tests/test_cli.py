import json
import shutil
import subprocess

import pytest

from multisecant.cli import run


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def write_config(tmp_path):
    def write(obj, name="run.json"):
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(path)
    return write


BASE = {"curve": {"f": [0, 24, -50, 35, -10, 1]}, "seed": 7}


@pytest.mark.parametrize("raw", [
    {"curve": {"f": [1, 0, 0, 0, 1]}},
    {**BASE, "unknown": True},
    "{not json",
    {**BASE, "system": {"kind": "nonspecial_monomial", "n": 3, "selection": [0, 1, 2, 4]}},
])
def test_config_errors_exit_2_without_report(capsys, write_config, raw):
    code, out, err = invoke(capsys, "fiber", "--config", write_config(raw))
    assert code == 2
    assert out == ""
    assert "config error" in err


def test_missing_config_file(capsys, tmp_path):
    code, out, _ = invoke(capsys, "periods", "--config", str(tmp_path / "absent.json"))
    assert code == 2 and out == ""


def test_fiber_of_default_system(capsys):
    code, out, _ = invoke(capsys, "fiber", "--seed", "3")
    doc = json.loads(out)
    assert code == 0 and doc["status"] == "pass"
    rep = doc["reports"][0]
    assert rep["details"]["count"] == 4
    assert len(rep["details"]["fiber"]) == 4
    assert doc["schema"] == 1 and doc["command"] == "fiber"
    assert doc["seed"] == 3 and doc["config"]["seed"] == 3
    assert "timestamp" in doc and "halfperiod_encoding" in doc


def test_fiber_with_given_hyperplane(capsys, write_config):
    path = write_config({**BASE, "system": {"kind": "nonspecial_monomial", "n": 3,
                                            "selection": [0, 1, 3, 4]},
                         "params": {"H": [1, [0.5, 0.2], -2, 0.7]}})
    code, out, _ = invoke(capsys, "fiber", "--config", path)
    doc = json.loads(out)
    assert code == 0
    assert doc["reports"][0]["details"]["count"] == 20


def test_periods_and_theta_chain(capsys, tmp_path):
    periods = tmp_path / "periods.json"
    assert invoke(capsys, "periods", "--out", str(periods))[0] == 0
    doc = json.loads(periods.read_text())
    assert doc["reports"][0]["checks"][0]["name"] == "symmetry_residual"
    code, out, _ = invoke(capsys, "theta", "--tau-from", str(periods), "--z", "0.1+0.2j,0",
                          "--char", "1/2,1/2;1/2,0")
    theta = json.loads(out)["reports"][0]["details"]
    assert code == 0 and theta["parity"] == 1


def test_theta_length_mismatch(capsys):
    code, out, _ = invoke(capsys, "theta", "--z", "0.1")
    assert code == 2 and out == ""


@pytest.mark.parametrize("argv,status", [
    (["mult"], "pass"),
    (["strata"], "pass"),
    (["gunning", "make"], "pass"),
    (["gunning", "verify"], "pass"),
    (["reciprocal"], "pass"),
    (["zfamily"], "pass"),
])
def test_commands_pass_on_default_config(capsys, argv, status):
    code, out, _ = invoke(capsys, *argv, "--seed", "11")
    doc = json.loads(out)
    assert doc["status"] == status and code == 0, doc["failing_checks"]


def test_fiberstrat_on_pencil_multiple_is_hypothesis_not_met(capsys):
    code, out, _ = invoke(capsys, "fiberstrat")
    doc = json.loads(out)
    assert code == 0
    assert "hypothesis_not_met" in doc["statuses"]


def test_numerical_error_gives_failed_report(capsys, write_config):
    # complex branch points are outside the validated class
    path = write_config({"curve": {"f": [1, 0, 0, 0, 0, 1]}})
    code, out, _ = invoke(capsys, "periods", "--config", path)
    doc = json.loads(out)
    assert code == 1
    assert doc["status"] == "fail" and doc["error"]["type"] == "NonRealBranchPoints"


def test_same_seed_same_report(capsys):
    a = json.loads(invoke(capsys, "gunning", "verify", "--seed", "5")[1])
    b = json.loads(invoke(capsys, "gunning", "verify", "--seed", "5", "--threads", "3")[1])
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b


@pytest.mark.skipif(shutil.which("multisecant") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["multisecant", "fiber", "--seed", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "pass"
