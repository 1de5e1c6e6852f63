import csv
import io
import json
import math
import os
import subprocess
import sys
from fractions import Fraction

import pytest

from bcentropy import measure as ms
from bcentropy.cli import EXIT_FAIL, EXIT_OK, EXIT_RESOURCE, EXIT_USAGE, main, parse_sigmas


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def test_mahler_golden():
    code, text = run("mahler", "--poly", "x^2-x-1")
    assert code == EXIT_OK
    doc = json.loads(text)
    assert doc["approx"] == pytest.approx((1 + math.sqrt(5)) / 2)
    assert not doc["exact"]


def test_mahler_linear_and_zero():
    code, text = run("mahler", "--poly", "[−1,2]")
    doc = json.loads(text)
    assert code == EXIT_OK and Fraction(doc["lo"]) == Fraction(doc["hi"]) == 2 and doc["exact"]
    assert run("mahler", "--poly", "0")[0] == EXIT_USAGE
    assert run("mahler", "--poly", "x^")[0] == EXIT_USAGE


def test_entropy_level_csv():
    code, text = run("--format", "csv", "entropy", "--level", "1/2,1/2,8", "--scales", "-10:-1")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["sigma", "entropy", "cond_entropy", "abs_error"]
    assert [float(r[0]) for r in rows[1:]] == [float(s) for s in range(-10, 0)]
    # 256 equally weighted dyadic atoms spaced 2^-7
    by_sigma = {float(r[0]): float(r[1]) for r in rows[1:]}
    assert by_sigma[-7.0] == pytest.approx(8, abs=1e-12)


def test_entropy_single_atom_file(tmp_path):
    path = tmp_path / "d.json"
    ms.dump(ms.dirac(3), path)
    code, text = run("entropy", "--measure", str(path), "--scales", "-3,-2.5,0")
    assert code == EXIT_OK
    doc = json.loads(text)
    assert doc["atoms"] == 1
    assert all(x["entropy"] == 0 and x["cond_entropy"] == 0 for x in doc["profile"])


def test_entropy_bad_inputs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("entropy", "--measure", str(bad))[0] == EXIT_USAGE
    assert run("entropy", "--measure", str(tmp_path / "missing.json"))[0] == EXIT_USAGE
    assert run("entropy")[0] == EXIT_USAGE
    assert run("entropy", "--level", "1/2,1/2")[0] == EXIT_USAGE


def test_verify_default_and_margins():
    code, text = run("verify", "--n", "3")
    assert code == EXIT_OK
    doc = json.loads(text)
    assert doc["failed"] == 0 and len(doc["per_rule"]) == 18
    code, text = run("verify", "--rules", "R12", "--n", "100")
    assert code == EXIT_OK
    st = json.loads(text)["per_rule"]["R12"]
    assert abs(st["max_margin"]) <= 1e-9 and abs(st["min_margin"]) <= 1e-9


def test_verify_unknown_rule():
    assert run("verify", "--rules", "R1,R42")[0] == EXIT_USAGE


def test_verify_outputs(tmp_path):
    jl = tmp_path / "r.jsonl"
    code, _ = run("--seed", "3", "verify", "--rules", "R13", "--n", "5", "--jsonl", str(jl))
    assert code == EXIT_OK
    lines = jl.read_text().splitlines()
    assert len(lines) == 5 and all(json.loads(l)["rule"] == "R13" for l in lines)


def test_check_rational():
    code, text = run("check", "--criterion", "rational", "--a", "1", "--b", "1e50", "--p", "1/2")
    assert code == EXIT_OK and json.loads(text)["verdict"] == "PASS"
    code, text = run("check", "--criterion", "rational", "--a", "1", "--b", "10", "--p", "1/2")
    assert code == EXIT_FAIL and json.loads(text)["verdict"] == "FAIL"


def test_check_missing_and_bad_params():
    assert run("check", "--criterion", "rational", "--a", "1", "--p", "1/2")[0] == EXIT_USAGE
    assert run("check", "--criterion", "rational", "--a", "1", "--b", "x", "--p", "1/2")[0] == EXIT_USAGE
    assert run("check", "--criterion", "bogus")[0] == EXIT_USAGE
    assert run("check", "--criterion", "nth-root", "--n", "2", "--k", "1.5", "--p", "1/2")[0] == EXIT_USAGE


def test_check_other_criteria(tmp_path):
    assert run("check", "--criterion", "nth-root", "--n", "2", "--k", "1e40", "--p", "1/2")[0] == EXIT_OK
    assert run("check", "--criterion", "sparse", "--poly", "2x-4", "--n", "1e40", "--p", "1/2")[0] == EXIT_OK
    assert run("check", "--criterion", "explicit", "--poly", "x^2+x-1", "--p", "1/2")[0] == EXIT_FAIL
    code, text = run("check", "--criterion", "mahler-bounds", "--poly", "x^2-x-1")
    assert code == EXIT_OK and json.loads(text)["holds"]
    code, text = run("check", "--criterion", "gaussian", "--p", "1/2")
    assert code == EXIT_OK and json.loads(text)["positive"]
    batch = tmp_path / "b.csv"
    batch.write_text("polynomial,p\nx^2+x-1,1/2\n")
    code, text = run("check", "--criterion", "batch", "--csv", str(batch))
    assert code == EXIT_FAIL and json.loads(text)[0]["verdict"] == "FAIL"


def test_study_h_half():
    code, text = run("--format", "csv", "study", "--lambda", "1/2", "--lmax", "10", "--h")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [float(r["ratio"]) for r in rows] == pytest.approx([1.0] * 10, abs=1e-12)


def test_study_golden_separation():
    code, text = run("study", "--lambda", "x^2+x-1", "--lmax", "18", "--separation")
    assert code == EXIT_OK
    top = json.loads(text)["levels"][-1]
    assert top["l"] == 18
    assert abs(top["rate"] - math.log2((1 + math.sqrt(5)) / 2)) <= 0.15


def test_study_resource_bound():
    assert run("study", "--lambda", "1/2", "--lmax", "40")[0] == EXIT_RESOURCE
    assert run("--enumeration-bound", "6", "study", "--lambda", "1/2", "--lmax", "7")[0] == EXIT_RESOURCE


def test_study_decay_window():
    code, text = run("study", "--lambda", "1/2", "--lmax", "12", "--nmax", "6", "--decay")
    assert code == EXIT_OK and len(json.loads(text)["values"]) == 6
    assert run("study", "--lambda", "1/2", "--lmax", "12", "--nmax", "12", "--decay")[0] == EXIT_USAGE


def test_no_command_is_usage():
    assert run()[0] == EXIT_USAGE


def test_parse_sigmas():
    assert parse_sigmas("-3:-1, 0.5") == [-3, -2, -1, 0.5]
    assert parse_sigmas("2:0") == [2, 1, 0]


def test_threads_give_identical_bytes():
    a = run("--seed", "9", "--threads", "1", "verify", "--rules", "R1,R15", "--n", "6")
    b = run("--seed", "9", "--threads", "2", "verify", "--rules", "R1,R15", "--n", "6")
    assert a == b


def test_console_script_and_precision_env():
    env = dict(os.environ, BC_ENTROPY_PRECISION="256")
    res = subprocess.run(
        [sys.executable, "-m", "bcentropy.cli", "mahler", "--poly", "x^2-x-1"],
        capture_output=True, text=True, env=env, check=False,
    )
    assert res.returncode == 0
    assert json.loads(res.stdout)["precision_bits"] == 256
