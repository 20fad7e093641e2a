import json

import numpy as np

from src.models import ComparisonResult, TableRow
from src.report_generator import ReportGenerator, format_number, to_jsonable


def test_number_format():
    assert format_number(0.1) == "0.10000000000000001"
    assert format_number(3) == "3"
    assert format_number(np.float64(2.5)) == "2.5"
    assert format_number(True) == "true"


def test_complex_columns_split(tmp_path):
    reporter = ReportGenerator(tmp_path, "csv")
    path = reporter.write_columns("survival", {"t": [0.0, 1.0], "A": np.array([1 + 0j, 0.5 - 0.25j])})
    lines = path.read_text().splitlines()
    assert lines[0] == "t,A_re,A_im"
    assert lines[2] == "1,0.5,-0.25"


def test_json_output(tmp_path):
    reporter = ReportGenerator(tmp_path, "json")
    path = reporter.write_columns("density", {"omega": np.array([1.0]), "overlap": np.array([1j])})
    payload = json.loads(path.read_text())
    assert payload == {"omega": [1.0], "overlap": [[0.0, 1.0]]}


def test_jsonable_handles_dataclasses():
    comparison = ComparisonResult(matched=True, details={"x": np.float64(2.0)})
    assert to_jsonable(comparison) == {"matched": True, "differences": None, "details": {"x": 2.0}}


def test_output_is_deterministic(tmp_path):
    record = {"b": 1.0, "a": np.array([0.1, 0.2])}
    first = ReportGenerator(tmp_path / "one").write_record("asymptote", record).read_bytes()
    second = ReportGenerator(tmp_path / "two").write_record("asymptote", record).read_bytes()
    assert first == second


def test_table_rendering(tmp_path):
    rows = [TableRow(1, 1.0, 1.6e-9, 2.0e-7, 1e-10), TableRow(10, 1.28, 3.18e-7, 4.23e-5, 1e-15)]
    reporter = ReportGenerator(tmp_path, "csv")
    artifacts = reporter.write_table(rows, ComparisonResult(matched=True))
    text = artifacts["txt"].read_text()
    lines = text.splitlines()
    assert lines[0].split() == ["N", "R", "t_N", "[s]", "t_ep", "[s]", "|A(t_ep)|^2"]
    assert lines[1].split()[:2] == ["1", "1.0000"]
    assert lines[2].split()[2] == "3.1800e-07"
    assert "Reference check: PASS" in text
    assert artifacts["csv"].read_text().splitlines()[0] == "N,ratio,t_N_s,t_ep_s,A_ep_sq"
