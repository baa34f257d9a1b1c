"""Deterministic report serialization.

Files written into the output directory:

``report.json``      the full :class:`ExperimentReport` (config, config hash, versions,
                     rows, summary, refinement table, criteria, plot data, extras)
``raw.csv``          one row per (quantity, grid, partition, function) with
                     ``f_norm``, ``value`` and ``ratio = value / f_norm``; surfaces and
                     residuals use their own columns
``summary.csv``      family-max ratio per (quantity, grid, partition)
``refinement.csv``   relative changes between consecutive grids or partitions
``plotdata.csv``     jump experiments only: one row per (function, lambda) with
                     ``value = lambda ||sqrt(N_lambda)||_2 / ||f||_2``
"""
from __future__ import annotations

import csv
import os

from .experiments import ExperimentReport

TABLES = ("rows", "summary", "refinement", "plotdata")
FILENAMES = {"rows": "raw.csv", "summary": "summary.csv", "refinement": "refinement.csv",
             "plotdata": "plotdata.csv"}


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return v


def write_table(rows: list, path) -> None:
    columns: list = []
    for r in rows:
        for k in r:
            if k not in columns:
                columns.append(k)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])


def emit_report(report: ExperimentReport, out_dir, formats=("json", "csv")) -> list[str]:
    """Write the report files; returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if "json" in formats:
        path = os.path.join(out_dir, "report.json")
        with open(path, "w") as fh:
            fh.write(report.to_json())
        written.append(path)
    if "csv" in formats:
        for table in TABLES:
            rows = getattr(report, table)
            if not rows:
                continue
            path = os.path.join(out_dir, FILENAMES[table])
            write_table(rows, path)
            written.append(path)
    return written


def load_report(path) -> ExperimentReport:
    if os.path.isdir(path):
        path = os.path.join(path, "report.json")
    with open(path) as fh:
        return ExperimentReport.from_json(fh.read())


def recompute_ratios(report: ExperimentReport) -> list:
    """Ratios rebuilt from the raw ``value`` and ``f_norm`` columns."""
    return [(r["value"] / r["f_norm"] if r["f_norm"] > 0 else 0.0)
            for r in report.rows if "f_norm" in r]


def format_criteria(report: ExperimentReport) -> str:
    lines = [f"{report.experiment} [{report.config_hash}]"]
    for c in report.criteria:
        mark = "PASS" if c["passed"] else "FAIL"
        lines.append(f"  {mark}  {c['name']}: {c['detail']}")
    return "\n".join(lines)
