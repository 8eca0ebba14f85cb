import csv
import io
import json
import subprocess
import sys

import pytest

from cayley_tisgm import cli, tisgm


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_json(capsys):
    code, out, _ = run(capsys, "solve", "--theta", "12")
    assert code == 0
    data = json.loads(out)
    assert data["total"] == 153 and data["partial"] is False
    tags = {s["case_tag"] for s in data["solutions"]}
    assert tags == {"free", "sym_w1", "sym_wne1", "asym_w1", "asym_wne1"}
    assert sum(s["case_tag"] == "free" for s in data["solutions"]) == 3
    assert all(s["residual"] < 1e-9 for s in data["solutions"])


def test_solve_trivial_only(capsys):
    code, out, _ = run(capsys, "solve", "--theta", "1.2")
    data = json.loads(out)
    assert code == 0 and data["total"] == 1 and len(data["solutions"]) == 1


def test_solve_partial_for_k3(capsys):
    code, out, _ = run(capsys, "solve", "--k", "3", "--q", "4", "--theta", "20")
    assert code == 0 and json.loads(out)["partial"] is True


def test_solve_csv_single_m(capsys):
    code, out, _ = run(capsys, "solve", "--theta", "12", "--m", "1", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert {r["m"] for r in rows} == {"0", "1"}
    assert list(rows[0]) == ["theta", "m", "case_tag", "branch", "u", "v", "w", "residual"]


def test_census_sweep(capsys):
    code, out, _ = run(capsys, "census", "--theta-min", "1.2", "--theta-max", "20", "--steps", "5",
                       "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert [int(r["total"]) for r in rows] == [1, 1, 113, 183, 183]
    assert list(rows[0]) == ["theta", "total", "formula_total", "partial"]


def test_census_single_point_matches_solve(capsys):
    _, a, _ = run(capsys, "census", "--theta", "9")
    _, b, _ = run(capsys, "solve", "--theta", "9")
    assert json.loads(a)[0]["total"] == json.loads(b)["total"] == 93
    assert "entries" not in json.loads(a)[0]
    _, c, _ = run(capsys, "census", "--theta", "9", "--entries")
    assert sum(e["multiplicity"] for e in json.loads(c)[0]["entries"]) == 93


def test_census_entries_csv(capsys):
    code, out, _ = run(capsys, "census", "--theta", "12", "--entries", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and sum(int(r["multiplicity"]) for r in rows) == 153


def test_critical(capsys):
    code, out, _ = run(capsys, "critical", "--theta-min", "9", "--theta-max", "11")
    data = json.loads(out)
    assert code == 0
    assert [round(c["theta"], 4) for c in data["critical_values"]] == [9.899, 10.3633]
    assert all(c["changes_count"] for c in data["critical_values"])


def test_critical_unmerged(capsys):
    _, a, _ = run(capsys, "critical", "--theta-min", "8.3", "--theta-max", "8.4", "--format", "csv")
    _, b, _ = run(capsys, "critical", "--theta-min", "8.3", "--theta-max", "8.4", "--merge-tol", "0",
                  "--format", "csv")
    assert len(b.splitlines()) > len(a.splitlines())


def test_extremality_rows(capsys):
    code, out, _ = run(capsys, "extremality", "--measure", "mu_star", "--theta-min", "8", "--theta-max", "12",
                       "--steps", "3", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert list(rows[0]) == cli.EXT_FIELDS
    assert [r["present"] for r in rows] == ["False", "True", "True"]


def test_extremality_verdicts(capsys):
    _, out, _ = run(capsys, "extremality", "--theta", "25")
    assert json.loads(out)[0]["ks_verdict"] == "non_extreme"
    _, out, _ = run(capsys, "extremality", "--theta", "2")
    assert json.loads(out)[0]["msw_verdict"] == "extreme"


def test_usage_errors(capsys):
    assert run(capsys, "solve")[0] == 2
    assert run(capsys, "solve", "--theta", "12", "--q", "1")[0] == 2
    assert run(capsys, "census")[0] == 2
    assert run(capsys, "census", "--theta-min", "5", "--theta-max", "2", "--steps", "3")[0] == 2
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "solve", "--theta", "12", "--tol", "-1")[0] == 2


def test_computation_failure_exit_code(capsys, monkeypatch):
    def boom(args):
        raise ArithmeticError("no convergence")
    monkeypatch.setitem(cli.COMMANDS, "solve", boom)
    code, _, err = run(capsys, "solve", "--theta", "12")
    assert code == 1 and "no convergence" in err


def test_deterministic(capsys):
    _, a, _ = run(capsys, "solve", "--theta", "13")
    _, b, _ = run(capsys, "solve", "--theta", "13")
    assert a == b


def test_output_path(capsys, tmp_path):
    path = tmp_path / "out.csv"
    code, out, _ = run(capsys, "census", "--theta", "12", "--format", "csv", "--output-path", str(path))
    assert code == 0 and out == ""
    assert path.read_text().splitlines()[1].startswith("12,153")


def test_tolerance_env(capsys, monkeypatch):
    monkeypatch.setenv("TISGM_TOL", "1e-30")
    code, out, _ = run(capsys, "solve", "--theta", "12")
    assert code == 0
    sols = json.loads(out)["solutions"]
    assert len(sols) < 21
    assert all(s["residual"] <= 1e-30 for s in sols[1:])
    assert tisgm.residual_tol() == tisgm.RESIDUAL_TOL
    monkeypatch.setenv("TISGM_TOL", "abc")
    assert run(capsys, "solve", "--theta", "12")[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "cayley_tisgm", "census", "--theta", "5", "--format", "csv"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines() == ["theta,total,formula_total,partial", "5,1,1,0"]
