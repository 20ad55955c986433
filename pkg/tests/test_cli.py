import json
import shutil
import subprocess
import sys

import pytest

from twkbench import cli

SCEN = cli.bundled_corpus()


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cohomology_scenario(capsys):
    code, out, _ = run(["--scenario", SCEN / "cohomology_z5_f5.json"], capsys)
    rep = json.loads(out)
    assert code == cli.EXIT_PASS and rep["verdict"] == "pass"
    assert rep["outputs"]["H1"] == 1
    assert all("provenance" in c for c in rep["checks"] + rep["oracle_comparisons"])


def test_tw_count_scenario_shows_625(capsys):
    code, out, _ = run(["--scenario", SCEN / "tw_count_p5_q11_dual_numbers.json"], capsys)
    rep = json.loads(out)
    assert code == 0
    cmp = [o for o in rep["oracle_comparisons"] if o["ours"] == 625]
    assert cmp and all(o["oracle"] == 625 and o["ok"] for o in cmp)


def test_missing_group_field(tmp_path, capsys):
    bad = {"schema": cli.SCENARIO_SCHEMA, "name": "bad", "module": "group-cohomology", "operation": "cohomology",
           "inputs": {"p": 5, "module": {"kind": "trivial", "dim": 1}}}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, _, err = run(["--scenario", path], capsys)
    assert code == cli.EXIT_INPUT
    assert "inputs.group" in err


def test_malformed_json_reports_position(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"schema": "twkbench.scenario/1",\n "name": }')
    code, _, err = run(["--scenario", path], capsys)
    assert code == 2 and "broken.json:2:" in err


@pytest.mark.parametrize("argv", [["--scenario", "/nonexistent.json"], ["--suite", "hecke", "--budget-cells", "0"]])
def test_input_errors(argv, capsys):
    assert run(argv, capsys)[0] == 2


def test_unknown_operation(tmp_path, capsys):
    path = tmp_path / "op.json"
    path.write_text(json.dumps({"schema": cli.SCENARIO_SCHEMA, "name": "x", "module": "selmer",
                                "operation": "nope", "inputs": {}}))
    code, _, err = run(["--scenario", path], capsys)
    assert code == 2 and "scenario.operation" in err


def test_suite_hecke(capsys):
    code, out, _ = run(["--suite", "hecke"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert [r["scenario"] for r in rep["reports"]] == [f"hecke_q{q}" for q in (11, 2, 3, 5, 7)]
    for r in rep["reports"]:
        assert all(c["ok"] for c in r["checks"])


def test_corrupted_certificate_fails(tmp_path, capsys):
    sc = json.loads((SCEN / "hecke_q5.json").read_text())
    sc["name"] = "hecke_q5_corrupt"
    sc["inputs"]["corrupt"] = "T"
    (tmp_path / "hecke_q5_corrupt.json").write_text(json.dumps(sc))
    shutil.copy(SCEN / "hecke_q2.json", tmp_path)
    code, out, err = run(["--suite", "hecke", "--corpus", tmp_path], capsys)
    rep = json.loads(out)
    assert code == cli.EXIT_FAIL
    assert rep["failed"] == ["hecke_q5_corrupt"]
    assert "hecke_q5_corrupt" in err


def test_missing_corpus(tmp_path, capsys):
    assert run(["--suite", "hecke", "--corpus", tmp_path / "none"], capsys)[0] == 2


def test_reports_are_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["--suite", "patch", "--out", a, "--seed", "3"], capsys)
    run(["--suite", "patch", "--out", b, "--seed", "3", "--workers", "2"], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_oracle_off_skips_comparisons(capsys):
    _, out, _ = run(["--scenario", SCEN / "tw_count_p5_q11_dual_numbers.json", "--oracle", "off"], capsys)
    rep = json.loads(out)
    assert rep["oracle"] is False and rep["oracle_comparisons"] == []


def test_timing_flag(capsys):
    _, out, _ = run(["--scenario", SCEN / "cohomology_z5_f5.json", "--timing"], capsys)
    assert "timing_seconds" in json.loads(out)


def test_markdown_summary(tmp_path, capsys):
    md = tmp_path / "r.md"
    run(["--scenario", SCEN / "wd_roundtrip_mixed.json", "--markdown", md, "--out", tmp_path / "r.json"], capsys)
    text = md.read_text()
    assert "| wd_roundtrip_mixed | weil-deligne | pass |" in text


def test_every_bundled_scenario_parses():
    names = set()
    for f in sorted(SCEN.glob("*.json")):
        sc = cli.load_scenario(f)
        assert sc["name"] == f.stem and sc.get("suite") in cli.SUITES
        names.add(sc["name"])
    assert len(names) >= 20


def test_schema_validation(capsys):
    jsonschema = pytest.importorskip("jsonschema")
    schema_dir = SCEN.parent / "schema"
    sc_schema = json.loads((schema_dir / "scenario.schema.json").read_text())
    rep_schema = json.loads((schema_dir / "report.schema.json").read_text())
    for f in SCEN.glob("*.json"):
        jsonschema.validate(json.loads(f.read_text()), sc_schema)
    _, out, _ = run(["--scenario", SCEN / "cohomology_z5_f5.json"], capsys)
    jsonschema.validate(json.loads(out), rep_schema)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "twkbench", "--scenario", str(SCEN / "ihara_dual_p5.json")],
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "pass"
