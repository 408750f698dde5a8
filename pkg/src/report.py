"""
Rendering of solve reports: outer-iteration table, CSV and JSON.
"""
import csv
import io
import json
from typing import List

from src.models import IterationRecord, SolveReport

__all__ = ["COLUMNS", "HEADERS", "format_number", "row_cells", "render_table", "render_csv", "render_json",
           "render_summary", "render"]

COLUMNS = ("l", "f", "v", "r_inf", "g_inf", "mu", "tau", "k")
HEADERS = ("l", "f_l", "v_l", "||r||_inf", "||g||_inf", "mu_l", "tau_l", "k")


def format_number(value) -> str:
    """Integral -> int, moderate magnitude -> .4f, otherwise .4e; None -> '-'."""
    if value is None:
        return "-"
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    v = float(value)
    if v != v:
        return "nan"
    if v in (float("inf"), float("-inf")):
        return "inf" if v > 0 else "-inf"
    if v == int(v) and abs(v) < 1e5:
        return str(int(v))
    if 1e-3 <= abs(v) < 1e5:
        return f"{v:.4f}"
    return f"{v:.4e}"


def row_cells(record: IterationRecord) -> List[str]:
    data = record.to_dict()
    return [format_number(data[c]) for c in COLUMNS]


def render_table(report: SolveReport) -> str:
    rows = [list(HEADERS)] + [row_cells(r) for r in report.records]
    widths = [max(len(row[i]) for row in rows) for i in range(len(HEADERS))]
    lines = [f"Output for {report.problem}"]
    for idx, row in enumerate(rows):
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
        if idx == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_summary(report: SolveReport) -> str:
    x = ", ".join(format_number(v) for v in report.x)
    lines = [
        f"status: {report.status.value}",
        f"x: ({x})",
        f"f: {format_number(report.f)}  infeasibility: {format_number(report.infeasibility)}",
        f"N_f: {report.nf}  N_g: {report.ng}  iterations: {report.iters}",
    ]
    cert = report.diagnostics.get("stationarity_certificate")
    if cert is not None:
        lines.append(f"stationarity certificate: {format_number(cert)}")
    if report.message:
        lines.append(f"message: {report.message}")
    for v in report.violations:
        lines.append(f"violation: {v}")
    return "\n".join(lines)


def render_csv(report: SolveReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADERS)
    for r in report.records:
        writer.writerow(row_cells(r))
    return buf.getvalue()


def render_json(report: SolveReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=False, allow_nan=False)


def render(report: SolveReport, fmt: str) -> str:
    if fmt == "table":
        return render_table(report) + "\n\n" + render_summary(report)
    if fmt == "csv":
        return render_csv(report)
    if fmt == "json":
        return render_json(report)
    raise ValueError(f"unknown output format {fmt!r}")
