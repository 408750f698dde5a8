import csv
import io
import json

import numpy as np
import pytest

from src.models import IterationRecord, SolveReport, SolveStatus
from src.report import HEADERS, format_number, render, render_csv, render_json, render_table, row_cells


@pytest.mark.parametrize("value, text", [
    (None, "-"),
    (3, "3"),
    (14.0, "14"),
    (-44.0, "-44"),
    (7.60261, "7.6026"),
    (0.0012345, "0.0012"),
    (1e-9, "1.0000e-09"),
    (123456.7, "1.2346e+05"),
    (float("nan"), "nan"),
    (float("inf"), "inf"),
])
def test_format_number(value, text):
    assert format_number(value) == text


def _report():
    records = [
        IterationRecord(0, -4.0, 15.652475842498529, 14.0, 7.602602, 0.1, 1.0, None),
        IterationRecord(1, 1.25, 0.5, 0.75, 0.3, 0.1, 0.6, 3),
        IterationRecord(2, 2.0, 1e-9, 2.5e-8, None, None, None, 4),
    ]
    return SolveReport(
        problem="TP1",
        status=SolveStatus.APPROX_KKT,
        x=np.array([2.0, 3.0, 0.0]),
        t=np.zeros(2),
        s=np.zeros(2),
        lam=np.array([0.25, -1.0]),
        f=2.0,
        infeasibility=1e-9,
        records=records,
        nf=20,
        ng=19,
        iters=7,
        diagnostics={"fj_weight": np.float64(0.5), "relaxation_certificate": {"nu_minus_s": 0.0}},
    )


class TestRender:
    def test_table(self):
        text = render_table(_report())
        lines = text.splitlines()
        assert lines[0] == "Output for TP1"
        assert lines[1].split() == list(HEADERS)
        assert set(lines[2].replace(" ", "")) == {"-"}
        assert lines[3].split() == ["0", "-4", "15.6525", "14", "7.6026", "0.1000", "1", "-"]
        assert lines[5].split() == ["2", "2", "1.0000e-09", "2.5000e-08", "-", "-", "-", "4"]

    def test_csv_matches_table(self):
        report = _report()
        rows = list(csv.reader(io.StringIO(render_csv(report))))
        assert rows[0] == list(HEADERS)
        assert rows[1:] == [row_cells(r) for r in report.records]
        table_rows = [line.split() for line in render_table(report).splitlines()[3:]]
        assert rows[1:] == table_rows

    def test_json_matches_table(self):
        report = _report()
        data = json.loads(render_json(report))
        assert data["status"] == "ApproxKKT"
        assert data["final"]["x"] == [2.0, 3.0, 0.0]
        assert data["final"]["lambda"] == [0.25, -1.0]
        assert data["counters"] == {"nf": 20, "ng": 19, "iters": 7}
        assert data["diagnostics"]["fj_weight"] == 0.5
        cells = [[format_number(row[c]) for c in ("l", "f", "v", "r_inf", "g_inf", "mu", "tau", "k")]
                 for row in data["iterations"]]
        assert cells == [row_cells(r) for r in report.records]

    def test_json_non_finite_values_are_null(self):
        report = _report()
        report.f = float("nan")
        report.records[1].g_inf = float("inf")
        report.diagnostics["merit"] = {"phi": np.float64("nan"), "pi": -1.0}
        data = json.loads(render_json(report), parse_constant=pytest.fail)
        assert data["final"]["f"] is None
        assert data["iterations"][1]["g_inf"] is None
        assert data["diagnostics"]["merit"] == {"phi": None, "pi": -1.0}

    def test_summary(self):
        text = render(_report(), "table")
        assert "status: ApproxKKT" in text
        assert "x: (2, 3, 0)" in text
        assert "N_f: 20  N_g: 19  iterations: 7" in text

    def test_unknown_format(self):
        with pytest.raises(ValueError, match="xml"):
            render(_report(), "xml")
