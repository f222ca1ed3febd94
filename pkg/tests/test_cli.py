import json

import pytest
from click.testing import CliRunner

from ltau.cli import main
from ltau.corpus import CORPUS_DIR

C = CORPUS_DIR


@pytest.fixture
def cli():
    runner = CliRunner()
    return lambda *args: runner.invoke(main, [str(a) for a in args])


def test_check_ok(cli):
    r = cli("check", C / "production_line.ltau", "--sig", C / "factory.sig")
    assert r.exit_code == 0
    assert "unit ! 9" in r.output


def test_check_temporal_violation(cli):
    r = cli("check", C / "production_line_no_delay.ltau", "--sig", C / "factory.sig", "--json")
    assert r.exit_code == 1
    d = json.loads(r.output)
    assert (d["kind"], d["rule"]) == ("TemporalViolation", "Unbox")
    assert "needed 4, have 2" in d["message"]


def test_check_missing_signature(cli, tmp_path):
    r = cli("check", C / "production_line.ltau", "--sig", tmp_path / "none.sig")
    assert r.exit_code == 2


def test_check_parse_error(cli):
    assert cli("check", C / "bad_syntax.ltau", "--sig", C / "basics.sig").exit_code == 2


def test_check_keeps_input_order(cli):
    files = [C / "boxes.ltau", C / "unbound.ltau", C / "functions.ltau"]
    r = cli("check", *files, "--sig", C / "basics.sig", "--json", "--jobs", "3")
    rows = [json.loads(line) for line in r.output.splitlines()]
    assert [row["file"] for row in rows] == [str(f) for f in files]
    assert r.exit_code == 1


def test_run_writes_trace(cli, tmp_path):
    out = tmp_path / "t.jsonl"
    r = cli("run", C / "production_line.ltau", "--sig", C / "factory.sig", "--trace", out)
    assert r.exit_code == 0 and "time taken: 9" in r.output
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert rows[0] == {"schema": "ltau-trace", "version": 1}
    assert [row["time"] for row in rows if row.get("name") == "assemble"] == [6]


def test_run_unsafe_hits_monitor(cli):
    r = cli("run", C / "production_line_no_delay.ltau", "--sig", C / "factory.sig",
            "--unsafe-skip-check")
    assert r.exit_code == 3


def test_run_checked_rejects(cli):
    r = cli("run", C / "production_line_no_delay.ltau", "--sig", C / "factory.sig")
    assert r.exit_code == 1


def test_normalize(cli):
    r = cli("normalize", C / "eq_delay_merge_l.ltau", "--sig", C / "basics.sig")
    assert r.exit_code == 0 and "# :" in r.output


def test_eq_verdicts(cli):
    r = cli("eq", C / "eq_delay_merge_l.ltau", C / "eq_delay_merge_r.ltau", "--sig", C / "basics.sig")
    assert r.exit_code == 0 and r.output.startswith("Equal") and "verdict-code: 0" in r.output
    r = cli("eq", C / "eq_eta_fun_l.ltau", C / "eq_eta_fun_r.ltau", "--sig", C / "basics.sig", "--json")
    assert r.exit_code == 0 and json.loads(r.output)["code"] == 1


def test_laws_deterministic(cli):
    a = cli("laws", "--seed", 3, "--count", 5)
    b = cli("laws", "--seed", 3, "--count", 5)
    assert a.exit_code == 0 and a.output == b.output


def test_laws_mutant(cli):
    r = cli("laws", "--count", 20, "--mutant", "chi-drop-delay", "--suite", "handling")
    assert r.exit_code == 1 and "chi-delay" in r.output.splitlines()[-1]


def test_laws_depth_zero_warns(cli):
    r = cli("laws", "--depth", 0)
    assert r.exit_code == 0 and "warning" in r.output


def test_coverage(cli):
    r = cli("coverage")
    assert r.exit_code == 0 and "coverage complete" in r.output
