import json
import math

import numpy as np
import pandas as pd

from modules.combinatorics import ProblemSpec
from modules.report_writer import RunReport, ReportWriter, SWEEP_COLUMNS, sweep_frame
from utils.helpers import SpecRegime


def make_report(**overrides):
    values = dict(command="count", spec=ProblemSpec(3, (1, 1, 1, 1)), regime="GENERIC",
                  counts={"formula": 2, "schubert": 2}, timings={"formula": 0.5})
    values.update(overrides)
    return RunReport(**values)


def test_agreement():
    assert make_report().agreement
    assert not make_report(counts={"formula": 2, "rep": 3}).agreement
    assert RunReport(command="count").agreement


def test_keys_are_sorted_and_timings_optional():
    writer = ReportWriter({"output": {"json_indent": 4}})
    text = writer.dumps(make_report())
    data = json.loads(text)
    assert list(data) == sorted(data)
    assert data["timings"] == {"formula": 0.5}
    assert '\n    "agreement"' in text
    quiet = json.loads(ReportWriter({}, include_timings=False).dumps(make_report()))
    assert "timings" not in quiet


def test_values_become_plain_json():
    report = make_report(
        regime=SpecRegime.BOUNDARY,
        z_used=[1 + 2j, np.complex128(-0.5)],
        counts={"formula": np.int64(10)},
        orbits=[{"residual": math.inf, "ok": np.bool_(True), "points": np.array([0.25])}]
    )
    data = ReportWriter({}).to_dict(report)
    assert data["regime"] == "BOUNDARY"
    assert data["z_used"] == [[1.0, 2.0], [-0.5, 0.0]]
    assert data["counts"] == {"formula": 10}
    assert data["orbits"] == [{"residual": None, "ok": True, "points": [0.25]}]
    assert data["spec"]["k"] == 2


def test_large_integers_stay_exact():
    data = ReportWriter({}).to_dict(make_report(counts={"formula": 2 ** 70}))
    assert json.loads(json.dumps(data))["counts"]["formula"] == 2 ** 70


def test_write_json_to_stdout(capsys):
    ReportWriter({}, include_timings=False).write_json(make_report(), "-")
    assert json.loads(capsys.readouterr().out)["command"] == "count"


def test_write_json_creates_directories(tmp_path):
    path = tmp_path / "nested" / "report.json"
    ReportWriter({}).write_json(make_report(), str(path))
    assert json.loads(path.read_text())["counts"]["formula"] == 2


def test_sweep_csv(tmp_path):
    rows = [{"spec": "d=2 m=(1,1)", "d": 2, "m": "1,1", "regime": "GENERIC", "formula": 1,
             "schubert": 1, "sing": 1, "rep": 1, "agree": True, "orbits": None,
             "max_residual": None}]
    path = tmp_path / "sweep.csv"
    frame = ReportWriter({}).write_sweep_csv(rows, str(path))
    assert list(frame.columns) == SWEEP_COLUMNS
    loaded = pd.read_csv(path)
    assert loaded.loc[0, "formula"] == 1
    assert loaded["orbits"].isna().all()


def test_empty_sweep_frame():
    frame = sweep_frame([])
    assert frame.empty and list(frame.columns) == SWEEP_COLUMNS
    text = ReportWriter.format_sweep_summary(frame, [])
    assert "admissible specs checked: 0" in text
    assert "all routes agree" in text


def test_series_table_marks_mismatch():
    text = ReportWriter.format_series_table("t", [(1, 1, 1), (2, 2, 3)])
    lines = text.splitlines()
    assert not lines[3].endswith("MISMATCH")
    assert lines[4].endswith("MISMATCH")


def test_count_table():
    text = ReportWriter({}, include_timings=False).format_count_table(make_report())
    assert "d=3 m=(1,1,1,1)" in text
    assert "agreement: yes" in text
    assert "ms" not in text


def test_solve_table_handles_failed_reconstruction():
    report = make_report(command="solve", seed=3, orbits=[
        {"points": [[0.5, 0.0]], "reconstruction": None, "verification": None, "failure": "x"}])
    text = ReportWriter({}).format_solve_table(report)
    assert "n/a" in text and "FAIL" in text


def test_spot_check_is_written_when_present():
    writer = ReportWriter({})
    assert "spot_check" not in json.loads(writer.dumps(make_report()))
    check = {"original": 2, "perturbed": 1, "stable": False}
    report = make_report(command="solve", seed=3, spot_check=check)
    assert json.loads(writer.dumps(report))["spot_check"] == check
    assert "spot check: 2 -> 1 orbits (UNSTABLE)" in writer.format_solve_table(report)
