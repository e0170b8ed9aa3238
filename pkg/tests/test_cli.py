import csv
import hashlib
import json
import shutil

import pytest

from gallager3.cli import EXIT_BAD_CODE, EXIT_BUDGET, EXIT_FAILURES, EXIT_INFEASIBLE, EXIT_IO, EXIT_OK, EXIT_USAGE, build_parser, main

from conftest import FIXTURES


def run(args, capsys=None):
    code = main([str(a) for a in args])
    return code


@pytest.fixture
def girth6(tmp_path):
    dst = tmp_path / "girth6.alist"
    shutil.copy(FIXTURES / "girth6.alist", dst)
    return dst


def test_construct_writes_code_log_and_manifest(tmp_path):
    out, logf = tmp_path / "c.alist", tmp_path / "c.jsonl"
    assert run(["construct", "--n", 40, "--m", 40, "--out", out, "--log", logf]) == EXIT_OK
    man = json.loads((tmp_path / "c.alist.manifest.json").read_text())
    assert man["subcommand"] == "construct"
    assert man["code_digest"] == "sha256:" + hashlib.sha256(out.read_bytes()).hexdigest()
    assert man["parameters"]["summary"]["girth"] >= 8
    assert man["parameters"]["summary"]["structures_53"] == 0
    assert logf.read_text().splitlines()[0] == '{"m": 40, "n": 40}'


def test_replay_reproduces_outputs(tmp_path, girth6):
    out = tmp_path / "c.alist"
    assert run(["construct", "--n", 40, "--m", 40, "--seed", 2, "--randomize", "--out", out]) == EXIT_OK
    first = out.read_bytes()
    out.unlink()
    assert run(["replay", tmp_path / "c.alist.manifest.json"]) == EXIT_OK
    assert out.read_bytes() == first

    rep = tmp_path / "v.json"
    assert run(["verify", "--code", girth6, "--t", 2, "--out", rep]) == EXIT_FAILURES
    first = rep.read_bytes()
    rep.unlink()
    assert run(["replay", tmp_path / "v.json.manifest.json"]) == EXIT_FAILURES
    assert rep.read_bytes() == first


def test_infeasible_parameters_exit_code(tmp_path, capsys):
    assert run(["construct", "--n", 100, "--m", 40, "--out", tmp_path / "x.alist"]) == EXIT_INFEASIBLE
    assert "error: infeasible-parameters" in capsys.readouterr().err
    assert run(["construct", "--n", 60, "--m", 30, "--no-fallback", "--out", tmp_path / "x.alist"]) == EXIT_INFEASIBLE


def test_io_and_malformed_code_exit_codes(tmp_path, capsys):
    assert run(["verify", "--code", tmp_path / "missing.alist", "--out", tmp_path / "r.json"]) == EXIT_IO
    assert "error: io" in capsys.readouterr().err
    bad = tmp_path / "bad.alist"
    bad.write_text("3 2\n1 1\n")
    assert run(["verify", "--code", bad, "--out", tmp_path / "r.json"]) == EXIT_BAD_CODE
    assert "error: malformed-code" in capsys.readouterr().err
    assert len({EXIT_OK, EXIT_FAILURES, EXIT_USAGE, EXIT_IO, EXIT_BAD_CODE, EXIT_INFEASIBLE, EXIT_BUDGET}) == 7


def test_budget_exit_code(tmp_path, girth6):
    assert run(["verify", "--code", girth6, "--t", 3, "--budget", 100, "--out", tmp_path / "r.json"]) == EXIT_BUDGET


def test_unknown_flag_is_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["verify", "--code", "x", "--out", "y", "--bogus"])
    assert info.value.code == EXIT_USAGE


def test_help_lists_every_flag():
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices
    for name, p in sub.items():
        text = p.format_help()
        for action in p._actions:
            for opt in action.option_strings:
                assert opt in text, (name, opt)


def test_analyze_girth6_has_33_rows(tmp_path, girth6):
    out = tmp_path / "s.csv"
    assert run(["analyze", "--code", girth6, "--out", out]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert rows[0].keys() >= {"type", "support", "C", "cond_a", "cond_b", "critical_number"}
    assert any(r["type"] == "(3,3)" for r in rows)


def test_analyze_critical_numbers(tmp_path):
    out = tmp_path / "s.csv"
    assert run(["analyze", "--code", FIXTURES / "gq22_minus3.alist", "--critical", "--out", out]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    traps = [r for r in rows if r["type"] == "(5,3)" and r["cond_a"] == "1" and r["cond_b"] == "1"]
    assert traps and all(r["critical_number"] == "3" for r in traps)


def test_decode_outcome(tmp_path, girth6):
    recv = tmp_path / "e.txt"
    recv.write_text("3 17\n")
    out = tmp_path / "o.csv"
    assert run(["decode", "--code", girth6, "--received", recv, "--out", out]) == EXIT_OK
    row = next(csv.DictReader(out.open()))
    assert row["status"] == "Converged" and row["residual_error_support"] == ""
    recv.write_text("0" * 95 + "1")
    assert run(["decode", "--code", girth6, "--received", recv, "--out", out]) == EXIT_OK
    recv.write_text("999")
    assert run(["decode", "--code", girth6, "--received", recv, "--out", out]) == EXIT_USAGE


def test_verify_report(tmp_path, girth6):
    out = tmp_path / "r.json"
    assert run(["verify", "--code", FIXTURES / "gq22.alist", "--t", 1, "--out", out]) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["passed"] and rep["patterns_checked"] == 15 and "wall_time" not in rep
    assert run(["verify", "--code", girth6, "--t", 3, "--out", out]) == EXIT_FAILURES
    rep = json.loads(out.read_text())
    assert rep["failure_count"] == len(rep["failures"]) > 0


def test_simulate_csv(tmp_path, girth6):
    out = tmp_path / "fer.csv"
    args = ["simulate", "--code", girth6, "--alpha-list", "0.02,0.04", "--min-failures", 20, "--seed", 3, "--out", out]
    assert run(args + ["--workers", 1]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert [r["alpha"] for r in rows] == ["0.02", "0.04"]
    assert all(int(r["failures"]) == 20 for r in rows)
    first = out.read_bytes()
    assert run(args) == EXIT_OK
    assert out.read_bytes() == first
    assert run(["simulate", "--code", girth6, "--alpha-list", "x", "--out", out]) == EXIT_USAGE


def test_workers_environment_default(tmp_path, girth6, monkeypatch):
    monkeypatch.setenv("GALLAGER3_WORKERS", "1")
    out = tmp_path / "fer.csv"
    assert run(["simulate", "--code", girth6, "--alpha-list", "0.03", "--min-failures", 5, "--out", out]) == EXIT_OK
    assert json.loads((tmp_path / "fer.csv.manifest.json").read_text())["parameters"]["workers"] == 1
