import csv
import io
import json
import subprocess
import sys
from fractions import Fraction as F

import jsonschema
import pytest

from liouville_verify.cli import Report, dispatch, schema


def run(argv, capsys):
    code = dispatch(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(argv, capsys):
    code, out, _ = run(argv, capsys)
    doc = json.loads(out)
    jsonschema.validate(doc, schema())
    return code, doc


def test_thresholds_n7(capsys):
    code, doc = run_json(["thresholds", "--n", "7", "--p", "9/5"], capsys)
    assert code == 0
    lo, hi = (F(x) for x in doc["enclosures"]["M1"])
    assert F(3647, 1000) < lo < hi < F(3648, 1000) and hi - lo < F(1, 10**6)
    status = {v["name"]: v["status"] for v in doc["verdicts"]}
    assert status["M2 below 0.8"] == "certified"
    assert status["M1 > 2.6"] == "certified" and status["Delta > 0.284"] == "certified"
    assert doc["config"]["p"] == "9/5"


def test_thresholds_n8_delta(capsys):
    code, doc = run_json(["thresholds", "--n", "8"], capsys)
    assert code == 0
    assert {"name": "Delta > 0.322", "status": "certified"} in doc["verdicts"]


def test_claims_subset(capsys):
    code, doc = run_json(["claims", "--n-max", "30", "--claims", "1,7,10"], capsys)
    assert code == 0
    assert [v["name"] for v in doc["verdicts"]] == ["claim 1", "claim 7", "claim 10"]


def test_identities_byte_identical(capsys):
    argv = ["identities", "--trials", "20", "--seed", "1", "--dims", "3,7"]
    c1, a, _ = run(argv, capsys)
    c2, b, _ = run(argv + ["--jobs", "2"], capsys)
    assert c1 == c2 == 0 and a == b
    doc = json.loads(a)
    jsonschema.validate(doc, schema())
    assert doc["seed"] == 1


def test_young_csv(capsys):
    code, out, _ = run(["young", "--n-min", "7", "--n-max", "8", "--points", "4",
                        "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 16 and all(r["feasible"] == "True" for r in rows)


def test_shoot_and_sweep(capsys):
    code, doc = run_json(["shoot", "--n", "5", "--p", "2", "--M", "1"], capsys)
    assert code == 0 and doc["results"]["shot"]["classification"] == "crossed"
    code, doc = run_json(["sweep", "--n", "7", "--p", "9/5", "--M", "4", "--heights", "5"],
                         capsys)
    assert code == 0 and doc["results"]["sweep"]["consistent"]


def test_inconclusive_exit_code(capsys):
    code, _, _ = run(["shoot", "--r-max", "0.01"], capsys)
    assert code == 2


def test_exit_code_policy():
    rep = Report("claims", {})
    rep.verdicts.append({"name": "a", "status": "certified"})
    assert rep.exit_code() == 0
    rep.verdicts.append({"name": "b", "status": "inconclusive"})
    assert rep.exit_code() == 2
    rep.verdicts.append({"name": "c", "status": "violated"})
    assert rep.exit_code() == 1


@pytest.mark.parametrize("argv", [
    ["claims", "--bogus"],
    ["thresholds", "--p", "x/y"],
    ["nonsense"],
    [],
    ["thresholds", "--n", "2"],
    ["identities", "--jobs", "0"],
    ["sweep", "--p", "1"],
])
def test_usage_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 64 and "error" in err


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# batch settings\nn = 8\np = 5/3\nlemma = false\n")
    code, doc = run_json(["thresholds", "--config", str(cfg)], capsys)
    assert code == 0 and doc["config"]["n"] == 8 and doc["config"]["lemma"] is False
    code, doc = run_json(["thresholds", "--config", str(cfg), "--n", "7", "--p", "9/5"], capsys)
    assert doc["config"]["n"] == 7


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run(["thresholds", "--config", str(bad)], capsys)[0] == 64
    bad.write_text("lemma = maybe\n")
    assert run(["thresholds", "--config", str(bad)], capsys)[0] == 64
    assert run(["thresholds", "--config", str(tmp_path / "missing.cfg")], capsys)[0] == 64


def test_output_file_and_text(tmp_path, capsys):
    out = tmp_path / "r.txt"
    code, stdout, _ = run(["thresholds", "--format", "text", "-o", str(out)], capsys)
    assert code == 0 and stdout == ""
    text = out.read_text()
    assert "[certified] M2 < M1" in text and "M1 in [" in text


def test_help_exits_zero(capsys):
    assert run(["claims", "--help"], capsys)[0] == 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "liouville_verify", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
