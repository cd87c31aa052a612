import csv
import json
import subprocess
import sys

import pytest

from conelab.cli import main
from conelab.cones import save_cone
from conelab.errors import ConeLabError
from conelab.families import lorentz
from conelab.harness import (
    CSV_COLUMNS,
    EquivalenceRow,
    ExperimentConfig,
    ExperimentResult,
    classify,
    run_experiment,
    write_report,
)


def test_classify_bands():
    assert classify(1e-9, 1e-6, 1e-4) == "pass"
    assert classify(1e-5, 1e-6, 1e-4) == "inconclusive"
    assert classify(1e-3, 1e-6, 1e-4) == "fail"


def test_inconclusive_row_disagrees():
    row = EquivalenceRow("c", True, False, True, (0.0, 1e-5, 0.0), "inconclusive", "pass")
    assert not row.agrees
    assert EquivalenceRow("c", False, False, False, (1, 1, 1), "fail", "fail").agrees


@pytest.mark.parametrize(
    "kwargs",
    [
        {"experiment": "nope", "families": ["standard"]},
        {"experiment": "fbi-sweep"},
        {"experiment": "fbi-sweep", "families": ["standard"], "cone": "x.json"},
        {"experiment": "fbi-sweep", "families": ["standard"], "samples": 4},
        {"experiment": "fbi-sweep", "families": ["standard"], "tol": 0.0},
        {"experiment": "fbi-sweep", "families": ["standard"], "pass_threshold": 1e-3, "fail_threshold": 1e-4},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ConeLabError):
        ExperimentConfig(**kwargs)


def test_empty_report(tmp_path):
    config = ExperimentConfig("fbi-sweep", families=["kgon:3:k=4"])
    out, table = tmp_path / "r.json", tmp_path / "r.csv"
    write_report(ExperimentResult(config, []), out, table)
    data = json.loads(out.read_text())
    assert data["results"] == []
    assert data["config"]["families"] == ["kgon:3:k=4"]
    assert data["config"]["seed"] == 0 and data["experiment"] == "fbi-sweep"
    assert table.read_text().splitlines() == [",".join(CSV_COLUMNS)]


def test_single_row_csv(tmp_path):
    config = ExperimentConfig("css-sweep", families=["kgon:3:k=4"], hyperplanes=4, samples=16)
    result = run_experiment(config)
    table = tmp_path / "r.csv"
    write_report(result, tmp_path / "r.json", table)
    rows = list(csv.reader(table.open()))
    assert rows[0] == list(CSV_COLUMNS)
    assert len(rows) == 2
    assert rows[1][0] == "kgon-k4" and rows[1][1] == "css"


def test_write_error_names_path(tmp_path):
    config = ExperimentConfig("fbi-sweep", families=["kgon:3:k=4"])
    target = tmp_path / "missing" / "r.json"
    with pytest.raises(OSError, match="missing"):
        write_report(ExperimentResult(config, []), target)


def _run(tmp_path, *args):
    out = tmp_path / "out.json"
    return main([*args, "--out", str(out)]), out


def test_cli_agreement(tmp_path):
    code, out = _run(tmp_path, "equivalence-matrix", "--family", "kgon:3:k=3/4", "--family", "lorentz:3", "--interior-points", "3", "--hyperplanes", "8")
    assert code == 0
    assert [r["agrees"] for r in json.loads(out.read_text())["results"]] == [True, True, True]


def test_cli_disagreement_on_inconclusive(tmp_path, capsys):
    code, _ = _run(tmp_path, "equivalence-matrix", "--family", "lorentz:3", "--pass-threshold", "1e-30", "--fail-threshold", "1")
    assert code == 1
    assert "lorentz-d3-0" in capsys.readouterr().err


def test_cli_invalid_input(tmp_path, capsys):
    assert _run(tmp_path, "fbi-sweep", "--family", "bogus:3")[0] == 2
    assert _run(tmp_path, "fbi-sweep", "--cone", str(tmp_path / "none.json"))[0] == 2
    assert _run(tmp_path, "fbi-sweep", "--family", "kgon:3", "--samples", "2")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"variant": "quadratic", "dim": 3, "extra": 1}')
    assert _run(tmp_path, "fbi-sweep", "--cone", str(bad))[0] == 2
    with pytest.raises(SystemExit):
        main(["fbi-sweep", "--out", str(tmp_path / "x.json")])


def test_cli_budget_exhausted(tmp_path):
    code, out = _run(tmp_path, "centroid-search", "--family", "kgon:3:k=3", "--interior-points", "2", "--tol", "1e-30")
    assert code == 3
    assert json.loads(out.read_text())["results"][0]["exhausted"]


def test_cli_cone_file(tmp_path):
    path = tmp_path / "lorentz.json"
    save_cone(lorentz(4), path)
    code, out = _run(tmp_path, "fbi-sweep", "--cone", str(path), "--interior-points", "3")
    assert code == 0
    data = json.loads(out.read_text())
    assert data["results"][0]["cone_id"] == "lorentz"
    assert data["results"][0]["status"] == "pass"


def test_cli_trace(tmp_path):
    trace = tmp_path / "trace.json"
    code, _ = _run(tmp_path, "centroid-search", "--family", "kgon:3:k=4", "--interior-points", "2", "--trace", str(trace))
    assert code == 0
    runs = json.loads(trace.read_text())
    assert runs[0]["cone_id"] == "kgon-k4"
    assert any(p["iterates"] for p in runs[0]["points"])


def test_hammer_stress_reports_bounds(tmp_path):
    code, out = _run(tmp_path, "hammer-stress", "--family", "kgon:3:k=3", "--hyperplanes", "4")
    assert code == 0
    assert json.loads(out.read_text())["results"][0]["violations"] == 0


def test_thread_count_does_not_change_output(tmp_path, monkeypatch):
    args = ["css-sweep", "--family", "kgon:3:k=3-6", "--hyperplanes", "6", "--samples", "24"]
    out = tmp_path / "r.json"
    reports = []
    for threads in ("1", "4"):
        monkeypatch.setenv("CONE_LAB_THREADS", threads)
        assert main([*args, "--out", str(out)]) == 0
        reports.append(out.read_bytes())
    assert reports[0] == reports[1]


def test_module_entry_point(tmp_path):
    out = tmp_path / "g.json"
    proc = subprocess.run(
        [sys.executable, "-m", "conelab", "gamma-dump", "--family", "lorentz:3", "--interior-points", "2", "--samples", "8", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    curves = json.loads(out.read_text())["results"][0]["curves"]
    assert len(curves) == 2 and len(curves[0]["samples"]) == 8
