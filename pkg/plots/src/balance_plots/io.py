"""Readers for the two export formats, with strict schema checks.

Both readers fail loudly and name the offending column or key: a plot built
from a misread file looks plausible and lies, so no fuzzy parsing.
"""

import csv
import json
from dataclasses import dataclass

SWEEP_COLUMNS = ("load_multiplier", "policy", "seed", "mean_rt", "p95_rt",
                 "completion_rate", "std_util")

SUMMARY_REQUIRED_KEYS = ("policy_name", "seed", "mean_util",
                         "std_util_across_servers")


class PlotDataError(ValueError):
    """Input file does not match the documented export schema."""


@dataclass(frozen=True)
class SweepRow:
    load_multiplier: float
    policy: str
    seed: int
    mean_rt: float
    p95_rt: float
    completion_rate: float
    std_util: float


def read_sweep(path):
    """Parse sweep.csv into SweepRow records; header and types are strict."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotDataError(f"{path}: empty file, expected a sweep.csv header")
        if tuple(header) != SWEEP_COLUMNS:
            missing = [c for c in SWEEP_COLUMNS if c not in header]
            unexpected = [c for c in header if c not in SWEEP_COLUMNS]
            parts = []
            if missing:
                parts.append(f"missing column(s) {', '.join(missing)}")
            if unexpected:
                parts.append(f"unexpected column(s) {', '.join(unexpected)}")
            if not parts:
                parts.append(f"column order must be {','.join(SWEEP_COLUMNS)}")
            raise PlotDataError(f"{path}: bad sweep header: {'; '.join(parts)}")

        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw:
                continue
            if len(raw) != len(SWEEP_COLUMNS):
                raise PlotDataError(
                    f"{path}:{lineno}: expected {len(SWEEP_COLUMNS)} fields, got {len(raw)}")
            try:
                rows.append(SweepRow(
                    load_multiplier=float(raw[0]),
                    policy=raw[1],
                    seed=int(raw[2]),
                    mean_rt=float(raw[3]),
                    p95_rt=float(raw[4]),
                    completion_rate=float(raw[5]),
                    std_util=float(raw[6]),
                ))
            except ValueError as exc:
                raise PlotDataError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise PlotDataError(f"{path}: header only, no data rows")
    return rows


def read_summary(path):
    """Parse summary.json; returns the list of per-run entries."""
    with open(path) as f:
        try:
            payload = json.load(f)
        except json.JSONDecodeError as exc:
            raise PlotDataError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, list):
        raise PlotDataError(f"{path}: expected a JSON array of run summaries")
    if not payload:
        raise PlotDataError(f"{path}: summary array is empty, nothing to plot")
    for i, entry in enumerate(payload):
        if not isinstance(entry, dict):
            raise PlotDataError(f"{path}: entry {i} is not an object")
        missing = [k for k in SUMMARY_REQUIRED_KEYS if k not in entry]
        if missing:
            raise PlotDataError(
                f"{path}: entry {i} is missing key(s) {', '.join(missing)}")
        for key in ("mean_util", "std_util_across_servers"):
            if not isinstance(entry[key], (int, float)) or isinstance(entry[key], bool):
                raise PlotDataError(
                    f"{path}: entry {i} field {key} must be a number, "
                    f"got {entry[key]!r}")
    return payload


def median(values):
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    return ordered[mid] if n % 2 else 0.5 * (ordered[mid - 1] + ordered[mid])


def policies_in_order(names):
    """Unique policy names, keeping first-appearance order from the file."""
    seen = []
    for name in names:
        if name not in seen:
            seen.append(name)
    return seen
