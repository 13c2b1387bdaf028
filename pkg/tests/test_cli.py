"""Command-line front end: outputs, formats and exit codes."""

import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from mumford import cli

DATA = Path(__file__).parent / "data"


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


def run_json(*argv):
    code, text = run(*argv)
    return code, json.loads(text)


def test_mu():
    code, text = run("mu", "--tree", str(DATA / "pgl5-d6.json"))
    assert code == 0
    assert text == '{"mu": "3/40"}\n'


def test_output_is_byte_identical():
    a = run("enumerate", "--p", "3", "--qmax", "9", "--nmax", "2")
    b = run("enumerate", "--p", "3", "--qmax", "9", "--nmax", "2")
    assert a == b


def test_branch_ramify_realizable():
    assert run_json("branch", "--tree", str(DATA / "pgl5-d6.json"))[1]["total"] == 3
    code, rep = run_json("ramify", "--tree", str(DATA / "pgl5-d6.json"))
    assert code == 0 and sorted(rep["indices"]) == [2, 2, 20]
    assert run_json("realizable", "--tree", str(DATA / "pgl5-d6.json"))[1]["realizable"] == "yes"


def test_schottky_build():
    code, rep = run_json("schottky-build", "--name", "pgl-dihedral", "--q", "4")
    assert code == 0 and rep["genus"] == 6 and rep["valid"]


def test_schottky_build_writes_hom_and_verify_reads_it(tmp_path):
    hom = tmp_path / "hom.json"
    assert run("schottky-build", "--name", "herrlich-g", "--g", "3", "--out", str(hom))[0] == 0
    code, rep = run_json("schottky-verify", "--hom", str(hom))
    assert code == 0 and rep["genus"] == 3 and rep["image_order"] == 24


def test_schottky_verify_invalid_exit_1(tmp_path):
    from mumford import schottky as sk

    h = sk.build_named("herrlich-g", g=2)
    d = sk.hom_to_json(h)
    # send the C2 x C2 vertex non-injectively: both generators to the same element
    d["vertices"]["v2"]["images"][1] = d["vertices"]["v2"]["images"][0]
    d["vertices"]["v1"]["images"][1] = d["vertices"]["v2"]["images"][0]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(d))
    code, _ = run("schottky-verify", "--hom", str(path))
    assert code == 1


def test_schottky_search_and_count():
    code, rep = run_json("schottky-search", "--tree", str(DATA / "pgl5-d6.json"))
    assert code == 0 and rep["image"] == "PGL" and rep["certificate"]["genus"] == 10
    code, rep = run_json("schottky-count", "--tree", str(DATA / "d3-d2-p3.json"), "--order", "12",
                         "--candidates", "d3d2")
    assert code == 0 and rep["kernels"] == 2


def test_budget_exceeded_exit_2():
    code, rep = run_json("--budget", "5", "schottky-count", "--tree", str(DATA / "d3-d2-p3.json"), "--order", "12",
                         "--candidates", "d3d2")
    assert code == 2 and "budget" in rep["error"]


def test_budget_env(monkeypatch):
    monkeypatch.setenv(cli.BUDGET_ENV, "50")
    code, _ = run("curve-report", "--family", "lines", "--q", "3", "--ext", "2")
    assert code == 2


def test_invalid_input_exit_2(tmp_path):
    assert run("mu", "--tree", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("mu", "--tree", str(bad))[0] == 2
    assert run("nonsense")[0] == 2
    assert run("mu", "--tree", str(DATA / "pgl5-d6.json"), "--unknown-flag")[0] == 2
    assert run("bound", "--N0", "10", "--mu", "x/y")[0] == 2
    assert run("curve-build", "--family", "quadric-unitary", "--q", "4")[0] == 2


def test_bound():
    code, rep = run_json("bound", "--g", "10", "--p", "5", "--N0", "120", "--mu", "3/40")
    assert code == 0
    assert rep["F"]["exact"] == 120 and rep["suitable"] and rep["g0"] == "10"
    assert rep["aut_bound"]["value"] == 120


def test_tables_and_repro():
    code, rep = run_json("tables", "--p", "5", "--q", "5")
    assert code == 0 and rep["all_ok"]
    code, rep = run_json("repro", "--table", "8.4", "--p", "5", "--qmax", "9")
    assert code == 0 and rep["all_ok"] and rep["rows"]
    code, rep = run_json("repro", "--table", "prop-8.1", "--p", "7")
    assert code == 0 and rep["count"] == 4 and {r["mu"] for r in rep["rows"]} == {"1/12"}
    assert run_json("repro", "--table", "mu-twelfth", "--p", "7") == (code, rep)


def test_repro_thresholds_reports_failed_claim():
    code, rep = run_json("repro", "--table", "lists-6.3")
    assert code == 1 and rep["failed"] == ["A(xi)"]
    labels = {r["label"]: r for r in rep["rows"]}
    assert labels["A(i)"]["ok"]


def test_csv_format():
    code, text = run("--format", "csv", "enumerate", "--p", "3", "--qmax", "3", "--nmax", "1")
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0] == "branch,family_id,mu,params,truncated"
    assert len(lines) > 1


def test_curves_and_strat():
    code, rep = run_json("curve-report", "--family", "quadric-unitary", "--q", "3", "--ext", "2")
    assert code == 0 and rep["nodes"] == 3 and rep["plucker_genus"] == 0
    code, rep = run_json("curve-build", "--family", "lines", "--q", "3")
    assert code == 0 and rep["degree"] == 4
    code, rep = run_json("strat-tame", "--p", "3", "--m", "5", "--n", "6")
    assert code == 0 and rep["mismatches"] == []
    code, rep = run_json("strat-tame", "--p", "3", "--m", "2", "--n", "1", "--i", "1")
    assert rep["coeff"] == 2
    code, rep = run_json("strat-as", "--p", "3", "--nmax", "2")
    assert code == 0 and rep["identity_ok"] and rep["rows"][0]["f"] == 2


def test_curve_report_from_file(tmp_path):
    code, text = run("curve-build", "--family", "bh-char2", "--q", "4")
    path = tmp_path / "c.json"
    path.write_text(text)
    code, rep = run_json("curve-report", "--curve", str(path), "--ext", "2")
    assert code == 0 and rep["nodes"] == 6


def test_help_for_every_subcommand():
    parser = cli.build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    assert set(sub.choices) == {"mu", "branch", "ramify", "realizable", "enumerate", "tables", "bound",
                                "schottky-verify", "schottky-build", "schottky-search", "schottky-count",
                                "curve-build", "curve-report", "strat-tame", "strat-as", "repro"}
    for name, sp in sub.choices.items():
        assert sp.description, name


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "mumford", "mu", "--tree", str(DATA / "pgl5-d6.json")],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0 and json.loads(r.stdout) == {"mu": "3/40"}
