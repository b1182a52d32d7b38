"""Deterministic report files: CSV rows and JSON summaries.

Floats are written with shortest round-trip repr and rows in task order,
so identical runs produce byte-identical files.  CSV columns follow first
appearance order within a report.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .runner import TaskReport


def _cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def _jsonable(value):
    if isinstance(value, bool):
        return value
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()  # numpy scalars
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def report_csv(report: TaskReport) -> str:
    columns: list[str] = []
    for row in report.rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    lines = [",".join(columns)]
    for row in report.rows:
        lines.append(",".join(_cell(row.get(c, "")) for c in columns))
    return "\n".join(lines) + "\n"


def report_json(report: TaskReport) -> str:
    return json.dumps(_jsonable(report.to_json_obj()), indent=2, sort_keys=True) + "\n"


def write_reports(
    reports: list[TaskReport], out_dir: str | Path, fmt: str = "both"
) -> dict:
    """Write one file per task plus a run summary; returns the summary object."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {
        "tasks": [
            {"name": r.name, "task": r.task, "passed": r.passed} for r in reports
        ],
        "passed": all(r.passed for r in reports),
    }
    for report in reports:
        if fmt in ("csv", "both"):
            (out / f"{report.name}.csv").write_text(report_csv(report))
        if fmt in ("json", "both"):
            (out / f"{report.name}.json").write_text(report_json(report))
    (out / "summary.json").write_text(
        json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n"
    )
    return summary
