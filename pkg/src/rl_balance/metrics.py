"""Per-run measurement: task records, utilization series, summary statistics,
and byte-stable CSV/JSON export.

The three headline numbers mirror the usual load-balancer report card:
mean/percentile response time, per-server time-averaged utilization, and the
fraction of arrived tasks completed within the evaluation window.
"""

import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional


class DuplicateRecordError(ValueError):
    """A completion record for an already-recorded task id."""


@dataclass(frozen=True, slots=True)
class CompletedTaskRecord:
    task_id: int
    server_id: int
    arrival_time: float
    start_time: float
    completion_time: float
    response_time: float  # completion_time - arrival_time, exact


@dataclass(frozen=True, slots=True)
class UtilizationSample:
    time: float
    server_id: int
    instant_utilization: float
    time_avg_utilization: float
    queue_length: int


@dataclass(frozen=True, slots=True)
class RunSummary:
    policy_name: str
    seed: int
    tasks_arrived: int
    tasks_completed_in_window: int
    completion_rate: float
    mean_rt: float
    p50_rt: float
    p95_rt: float
    p99_rt: float
    mean_util: float
    std_util_across_servers: float
    zero_arrivals: bool = False  # warning flag: completion_rate defaulted to 1.0


@dataclass
class RunResult:
    """Everything one simulation run produced; the unit of comparison/export."""

    policy_name: str
    seed: int
    horizon: float
    tasks_arrived: int
    records: list = field(default_factory=list)
    samples: list = field(default_factory=list)
    final_time_avg_util: list = field(default_factory=list)  # per server, window [0, horizon]


class MetricsCollector:
    """Accumulates completion records and cadence-based utilization samples.

    One collector per run; never shared across runs.
    """

    def __init__(self, sample_every: Optional[float] = 1.0):
        self.records = []
        self.samples = []
        self.sample_every = sample_every
        self._seen_ids = set()

    def record_completion(self, record: CompletedTaskRecord) -> None:
        if record.task_id in self._seen_ids:
            raise DuplicateRecordError(f"duplicate completion record for task {record.task_id}")
        self._seen_ids.add(record.task_id)
        self.records.append(record)

    def sample_utilization(self, cluster, now: float) -> None:
        """One sample row per server at time `now` (cluster state is as-of now)."""
        append = self.samples.append
        for server in cluster:
            spec = server.spec
            occupied = len(server.in_service)
            busy = server.busy_time_at(now)
            time_avg = busy / (now * spec.slots) if now > 0.0 else 0.0
            append(UtilizationSample(
                time=now,
                server_id=spec.server_id,
                instant_utilization=occupied / spec.slots,
                time_avg_utilization=time_avg,
                queue_length=len(server.wait_queue),
            ))


def _nearest_rank(sorted_values, p: float) -> float:
    """ceil(p*n)-th order statistic (1-indexed) of an ascending list."""
    n = len(sorted_values)
    idx = math.ceil(p * n) - 1
    return sorted_values[max(idx, 0)]


def summarize(result: RunResult) -> RunSummary:
    """Fold one finished run into the headline metrics.

    Completion window is [0, horizon]; response-time statistics use every
    record (including tasks that finished after the horizon) to avoid
    truncation bias.
    """
    records = result.records
    arrived = result.tasks_arrived
    in_window = sum(1 for r in records if r.completion_time <= result.horizon)
    zero_arrivals = arrived == 0
    rate = 1.0 if zero_arrivals else in_window / arrived

    if records:
        rts = sorted(r.response_time for r in records)
        mean_rt = sum(rts) / len(rts)
        p50 = _nearest_rank(rts, 0.50)
        p95 = _nearest_rank(rts, 0.95)
        p99 = _nearest_rank(rts, 0.99)
    else:
        mean_rt = p50 = p95 = p99 = 0.0

    utils = result.final_time_avg_util
    if utils:
        mean_util = sum(utils) / len(utils)
        std_util = math.sqrt(sum((u - mean_util) ** 2 for u in utils) / len(utils))
    else:
        mean_util = std_util = 0.0

    return RunSummary(
        policy_name=result.policy_name,
        seed=result.seed,
        tasks_arrived=arrived,
        tasks_completed_in_window=in_window,
        completion_rate=rate,
        mean_rt=mean_rt,
        p50_rt=p50,
        p95_rt=p95,
        p99_rt=p99,
        mean_util=mean_util,
        std_util_across_servers=std_util,
        zero_arrivals=zero_arrivals,
    )


# ---------------------------------------------------------------------------
# export: fixed formatting (round-half-even, 9 significant digits) so
# identical runs produce byte-identical files
# ---------------------------------------------------------------------------

TASKS_CSV_HEADER = "task_id,server_id,arrival_time,start_time,completion_time,response_time"
UTIL_CSV_HEADER = "time,server_id,instant_utilization,time_avg_utilization,queue_length"

SUMMARY_FIELDS = (
    "policy_name", "seed", "tasks_arrived", "tasks_completed_in_window",
    "completion_rate", "mean_rt", "p50_rt", "p95_rt", "p99_rt",
    "mean_util", "std_util_across_servers",
)


def fmt(x: float) -> str:
    """9-significant-digit decimal; Python's conversion rounds half to even."""
    return f"{x:.9g}"


def tasks_csv_path(out_dir, policy_name, seed):
    return os.path.join(out_dir, f"tasks_{policy_name}_{seed}.csv")


def util_csv_path(out_dir, policy_name, seed):
    return os.path.join(out_dir, f"util_{policy_name}_{seed}.csv")


def write_tasks_csv(result: RunResult, out_dir) -> str:
    path = tasks_csv_path(out_dir, result.policy_name, result.seed)
    try:
        with open(path, "w") as f:
            f.write(TASKS_CSV_HEADER + "\n")
            for r in result.records:
                f.write(f"{r.task_id},{r.server_id},{fmt(r.arrival_time)},"
                        f"{fmt(r.start_time)},{fmt(r.completion_time)},{fmt(r.response_time)}\n")
    except OSError as exc:
        raise OSError(f"writing {path}: {exc}") from exc
    return path


def write_util_csv(result: RunResult, out_dir) -> str:
    path = util_csv_path(out_dir, result.policy_name, result.seed)
    try:
        with open(path, "w") as f:
            f.write(UTIL_CSV_HEADER + "\n")
            for s in result.samples:
                f.write(f"{fmt(s.time)},{s.server_id},{fmt(s.instant_utilization)},"
                        f"{fmt(s.time_avg_utilization)},{s.queue_length}\n")
    except OSError as exc:
        raise OSError(f"writing {path}: {exc}") from exc
    return path


def summary_to_dict(summary: RunSummary) -> dict:
    out = {}
    for name in SUMMARY_FIELDS:
        value = getattr(summary, name)
        if isinstance(value, float):
            value = float(fmt(value))
        out[name] = value
    return out


def write_summary_json(summaries, out_dir) -> str:
    path = os.path.join(out_dir, "summary.json")
    payload = [summary_to_dict(s) for s in summaries]
    try:
        with open(path, "w") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
    except OSError as exc:
        raise OSError(f"writing {path}: {exc}") from exc
    return path


def export(results, out_dir) -> list:
    """Write per-run tasks/util CSVs plus one summary.json for the whole set.

    `results` is a list of (RunSummary, RunResult) pairs; an empty list still
    produces summary.json with an empty run array.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for _, result in results:
        written.append(write_tasks_csv(result, out_dir))
        written.append(write_util_csv(result, out_dir))
    written.append(write_summary_json([s for s, _ in results], out_dir))
    return written
