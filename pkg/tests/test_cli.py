import json
import subprocess
import sys

import numpy as np
import pytest

from ffl.cli import main
from ffl.errors import ConfigInvalid
from ffl.matrix import write_matrix
from ffl.report import CSV_HEADER, SuiteConfig, SuiteReport, emit_report, make_record, parse_report
from ffl.suites import child_seed, run_suite


def _run(args, capsysbinary):
    code = main(args)
    out = capsysbinary.readouterr()
    return code, out.out, out.err.decode()


def test_child_seed_is_pure_function():
    assert child_seed(1, 4, 0) == child_seed(1, 4, 0)
    seeds = {child_seed(1, n, i) for n in (2, 4) for i in range(50)}
    assert len(seeds) == 100


def test_dimension_suite_example():
    rep = run_suite(SuiteConfig(suite="dimension", n_list=(4,), trials=10, seed=1))
    assert rep.passed
    assert rep.aggregate["max_residual"] == 0.0
    assert len({r["trial"] for r in rep.records}) == 10


def test_lemma4_suite_example():
    rep = run_suite(SuiteConfig(suite="lemma4", n_list=(2, 4), trials=100, seed=42, tol=1e-8))
    assert rep.passed
    assert rep.aggregate["max_residual"] <= 1e-8


def test_theorem6_suite_example():
    rep = run_suite(SuiteConfig(suite="theorem6", n_list=(6,), trials=50, seed=7))
    gaps = [r for r in rep.records if r["property"].endswith("oracle_gap")]
    assert len(gaps) >= 50
    assert all(r["residual"] <= 1e-7 for r in gaps)
    assert rep.passed


def test_records_are_order_independent():
    a = run_suite(SuiteConfig(suite="quasitrace", n_list=(2, 3), trials=3, seed=5))
    b = run_suite(SuiteConfig(suite="quasitrace", n_list=(3, 2), trials=3, seed=5))
    key = lambda r: (r["n"], r["trial"], r["property"])
    assert sorted(a.records, key=key) == sorted(b.records, key=key)


def test_emit_empty_report():
    rep = SuiteReport({}, []).finalize(0.0)
    obj = json.loads(emit_report(rep, "json"))
    assert obj["records"] == [] and obj["aggregate"]["pass_count"] == 0
    assert emit_report(rep, "csv").decode().splitlines() == [",".join(CSV_HEADER)]


def test_emit_failing_record_and_round_trip():
    recs = [make_record("polar", 2, 0, 9, "reconstruction", 1e-3, 1e-10),
            make_record("polar", 2, 1, 10, "reconstruction", 1e-14, 1e-10)]
    rep = SuiteReport({"suite": "polar"}, recs).finalize(1.0)
    assert not rep.passed
    back = parse_report(emit_report(rep, "json"), "json")
    assert back.records == rep.records and back.aggregate == rep.aggregate
    rows = emit_report(rep, "csv").decode().splitlines()
    assert rows[1] == "0,polar.reconstruction,0.001,false"
    csv_back = parse_report(emit_report(rep, "csv"), "csv")
    assert [r["pass"] for r in csv_back.records] == [False, True]
    assert csv_back.records[0]["residual"] == 1e-3


def test_config_validation():
    with pytest.raises(ConfigInvalid):
        SuiteConfig(suite="nope").validate()
    with pytest.raises(ConfigInvalid):
        SuiteConfig(trials=0).validate()
    with pytest.raises(ConfigInvalid):
        SuiteConfig(suite="lemma5", n_list=(3,)).validate()
    with pytest.raises(ConfigInvalid):
        SuiteConfig(tol=-1.0).validate()


def test_cli_pass(capsysbinary):
    code, out, err = _run(["--suite", "dimension", "--n", "4", "--trials", "10", "--seed", "1"], capsysbinary)
    assert code == 0
    obj = json.loads(out)
    assert obj["aggregate"]["fail_count"] == 0 and obj["aggregate"]["max_residual"] == 0.0
    assert "checks passed" in err


def test_cli_failure_exit_and_replay(capsysbinary):
    code, out, err = _run(["--suite", "polar", "--n", "3", "--trials", "2", "--tol", "1e-30"], capsysbinary)
    assert code == 1
    fails = [r for r in json.loads(out)["records"] if not r["pass"]]
    assert fails and "--replay-seed" in err
    seed = fails[0]["seed"]
    code, out, _ = _run(["--suite", "polar", "--n", "3", "--replay-seed", str(seed), "--tol", "1e-30"], capsysbinary)
    replay = json.loads(out)["records"]
    assert code == 1
    assert {r["seed"] for r in replay} == {seed}
    same = [r for r in replay if r["property"] == fails[0]["property"]]
    assert same[0]["residual"] == fails[0]["residual"]


def test_cli_config_errors(capsysbinary, monkeypatch):
    assert _run(["--suite", "lemma5", "--n", "3"], capsysbinary)[0] == 2
    assert _run(["--trials", "0"], capsysbinary)[0] == 2
    assert _run(["--input", "/nonexistent/fixture.txt", "--suite", "polar"], capsysbinary)[0] == 2
    monkeypatch.setenv("FFL_DEFAULT_TOL", "abc")
    assert _run(["--suite", "polar"], capsysbinary)[0] == 2
    with pytest.raises(SystemExit):
        main(["--suite", "bogus"])


def test_env_default_tol(capsysbinary, monkeypatch):
    monkeypatch.setenv("FFL_DEFAULT_TOL", "1e-30")
    code, out, _ = _run(["--suite", "polar", "--n", "3", "--trials", "2"], capsysbinary)
    assert code == 1
    assert all(r["tol"] == 1e-30 for r in json.loads(out)["records"])
    # an explicit flag wins over the environment
    code, out, _ = _run(["--suite", "polar", "--n", "2", "--trials", "1", "--tol", "1e-6"], capsysbinary)
    assert code == 0


def test_cli_fixture_input(tmp_path, capsysbinary):
    path = tmp_path / "x.txt"
    write_matrix(path, np.array([[0, 2], [0, 0]], dtype=complex))
    code, out, _ = _run(["--suite", "polar", "--input", str(path)], capsysbinary)
    assert code == 0
    recs = json.loads(out)["records"]
    assert {r["n"] for r in recs} == {2} and {r["trial"] for r in recs} == {0}


def test_cli_report_file_and_csv(tmp_path, capsysbinary):
    path = tmp_path / "r.csv"
    code, out, _ = _run(["--suite", "star", "--n", "4", "--trials", "3", "--format", "csv", "--report", str(path)],
                        capsysbinary)
    assert code == 0 and out == b""
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert all(line.split(",")[1].startswith("star.") for line in lines[1:])


def _strip_timing(data: bytes) -> dict:
    obj = json.loads(data)
    obj["aggregate"].pop("wall_time_ms")
    return obj


def test_cli_subprocess_is_deterministic(tmp_path):
    outs = []
    path = tmp_path / "report.json"
    for _ in range(2):
        proc = subprocess.run(
            [sys.executable, "-m", "ffl", "--suite", "corollaries", "--n", "4", "--n", "6",
             "--trials", "4", "--seed", "3", "--report", str(path)],
            capture_output=True,
        )
        assert proc.returncode == 0, proc.stderr.decode()
        outs.append(path.read_bytes())
    a, b = (_strip_timing(o) for o in outs)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
