import csv
import json

import numpy as np
import pytest

from bihilb import cli
from bihilb.report import CSV_COLUMNS, Check, Report, check_rng, emit_report, run_checks


def _run(argv):
    return cli.main([str(a) for a in argv])


def test_hk4_suite_passes(tmp_path, capsys):
    assert _run(["suite", "hk4", "--out", tmp_path, "--deterministic"]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["summary"]["failed"] == 0 and rep["summary"]["total"] == 12
    assert "created" not in rep
    out = capsys.readouterr().out
    assert out.count("PASS") == 12


@pytest.mark.parametrize("name", ["bipoisson-n2", "quat-spectral-n3"])
def test_fast_suites_pass(tmp_path, name):
    assert _run(["suite", name, "--out", tmp_path, "--seed", 3]) == 0


def test_nahm_suite_writes_report_and_figures(tmp_path):
    assert _run(["suite", "nahm-k2", "--out", tmp_path, "--format", "svg"]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["summary"]["failed"] == 0
    assert (tmp_path / "isospectral_drift.svg").read_text().lstrip().startswith("<?xml")
    assert "nahm_profiles.svg" in rep["artifacts"]["svg"]


def test_unknown_suite_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        _run(["suite", "nope", "--out", tmp_path])
    assert exc.value.code == 2


def test_deterministic_output_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert _run(["suite", "quat-spectral-n3", "--out", d, "--seed", 11, "--deterministic"]) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("BIHILB_OUT", str(tmp_path / "env"))
    assert _run(["hk4-verify", "--model", "flat", "--points", 10]) == 0
    assert (tmp_path / "env" / "report.json").exists()
    # an explicit --out wins
    assert _run(["hk4-verify", "--model", "flat", "--points", 10, "--out", tmp_path / "flag"]) == 0
    assert (tmp_path / "flag" / "report.json").exists()


def test_bad_tolerance_in_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"params": {"tol": -1}}))
    with pytest.raises(SystemExit) as exc:
        _run(["suite", "hk4", "--config", cfg, "--out", tmp_path])
    assert exc.value.code == 2
    cfg.write_text("{not json")
    with pytest.raises(SystemExit) as exc:
        _run(["suite", "hk4", "--config", cfg, "--out", tmp_path])
    assert exc.value.code == 2


def test_io_error_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert _run(["hk4-verify", "--model", "flat", "--points", 10, "--out", blocker / "sub"]) == 3


def test_failing_input_pair_reports_seed(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    zero = [["0"] * 4 for _ in range(4)]
    P = [row[:] for row in zero]
    P[0][1] = P[2][3] = "1"
    Q = [row[:] for row in zero]
    Q[2][3] = "u1"
    spec = {"coords": ["z1", "u1", "z2", "u2"], "P": P, "Q": Q}
    cfg.write_text(json.dumps({"params": {"n": 1, "bivectors": spec}}))
    assert _run(["bipoisson-check", "--config", cfg, "--out", tmp_path, "--seed", 5]) == 1
    out = capsys.readouterr().out
    assert "FAIL  input_pair_poisson" in out and "(seed 5, stream 0)" in out


def test_nahm_file_pipeline(tmp_path):
    assert _run(["nahm-run", "--charge", 1, "--step", 0.01, "--out", tmp_path]) == 0
    data = tmp_path / "nahm_k1.json"
    assert data.exists()
    assert _run(["nahm-bivector", "--in", data, "--pairs", "phase:translation2", "--out", tmp_path / "b"]) == 0
    assert _run(["nahm-potential", "--in", data, "--out", tmp_path / "p"]) == 0
    with pytest.raises(SystemExit) as exc:
        _run(["nahm-bivector", "--in", tmp_path / "missing.json", "--out", tmp_path])
    assert exc.value.code == 2


def test_hilb_chart_point_table(tmp_path, capsys):
    pt = tmp_path / "pt.json"
    pt.write_text(json.dumps({"roots": [1, 2], "values": [3, 4]}))
    assert _run(["hilb-chart", "--n", 2, "--point", pt, "--out", tmp_path]) == 0
    out = capsys.readouterr().out
    assert "Pfaffian coefficient" in out


def test_quat_triple_input(tmp_path):
    from bihilb import quatlin as ql

    t = ql.HermQuatTriple.random(np.random.default_rng(0), 2)
    f = tmp_path / "t.json"
    f.write_text(json.dumps(t.to_json()))
    assert _run(["quat-spectral", "--n", 2, "--triple", f, "--out", tmp_path]) == 0
    assert "p" in json.loads((tmp_path / "curve.json").read_text())


# -- report layer ----------------------------------------------------------


def _three_checks():
    return [
        Check("a", lambda rng: (0.0, True, {"x": 1}, ""), 1e-8),
        Check("b", lambda rng: (float(rng.normal()), True, {}, "draw"), 1.0),
        Check("c", lambda rng: (1 / 0, True, {}, ""), 1.0),
    ]


def test_csv_has_one_row_per_check(tmp_path):
    rep = Report("demo", 4, results=run_checks(_three_checks(), 4))
    (path,) = emit_report(rep, tmp_path, "csv", timestamps=False)
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 3
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[2]["passed"] == "False" and rows[2]["residual"] == "inf"
    assert "ZeroDivisionError" in rows[2]["detail"]


def test_empty_report_skeleton(tmp_path):
    (path,) = emit_report(Report("empty", 0), tmp_path, "json", timestamps=False)
    d = json.loads(path.read_text())
    assert d["checks"] == [] and d["summary"] == {"total": 0, "passed": 0, "failed": 0}


def test_streams_independent_of_scheduling():
    checks = [Check(f"c{i}", lambda rng: (float(rng.random()), True, {}, ""), 1.0) for i in range(8)]
    serial = run_checks(checks, 9, workers=1)
    parallel = run_checks(checks, 9, workers=8)
    assert [r.residual for r in serial] == [r.residual for r in parallel]
    spawned = np.random.SeedSequence(9).spawn(8)
    assert serial[5].residual == np.random.default_rng(spawned[5]).random()
    assert check_rng(9, 5).random() == serial[5].residual
