"""Fit-report serialization: JSON lines plus a delimiter-separated table.

Absent metrics are rendered "NA"; the reproduction number renders as
"inf" when gamma is zero with beta positive.
"""

from __future__ import annotations

import json
import math

from .fit import FitResult
from .series import region_name

REPORT_COLUMNS = (
    "location",
    "topic",
    "n_users",
    "infection_rate",
    "recovery_rate",
    "r0",
    "peak_time",
    "peak_population",
    "participation_ratio",
    "loss",
    "converged",
)


def _num(value, digits=6):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return round(float(value), digits)


def result_row(res: FitResult, n_users: int | None = None) -> dict:
    m = res.metrics
    return {
        "location": region_name(res.region),
        "topic": res.topic,
        "n_users": n_users,
        "infection_rate": _num(res.params.beta) if res.params else None,
        "recovery_rate": _num(res.params.gamma) if res.params else None,
        "r0": _num(m.r0) if m else None,
        "peak_time": _num(m.t_star) if m else None,
        "peak_population": _num(m.i_peak) if m else None,
        "participation_ratio": _num(m.participation_ratio) if m else None,
        "loss": _num(res.loss, 9),
        "converged": res.converged,
        "evaluations": res.evaluations,
        "error": res.error,
    }


def write_fit_report_jsonl(path, rows: list[dict]):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def _cell(value):
    if value is None:
        return "NA"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def write_fit_report_table(path, rows: list[dict], delimiter: str = "\t"):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(delimiter.join(REPORT_COLUMNS) + "\n")
        for row in rows:
            fh.write(delimiter.join(_cell(row.get(col)) for col in REPORT_COLUMNS) + "\n")


def read_fit_report_jsonl(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
