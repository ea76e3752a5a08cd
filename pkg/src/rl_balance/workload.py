"""Reproducible task-trace generation for steady and bursty traffic.

Traces are materialized up front so every policy in a comparison consumes
the identical arrival sequence (common random numbers), and they round-trip
through CSV for replay. Steady traffic is a homogeneous Poisson process;
bursty traffic is a two-state Markov-modulated Poisson process whose
modulating state alternates low/high with exponentially distributed dwell
times. Arrival placement, task sizes, and dwell durations each consume
their own named stream (see seeds.py).
"""

import hashlib
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .engine import Task, TraceError, validate_trace
from . import seeds


class WorkloadError(ValueError):
    """Invalid workload specification."""


@dataclass(frozen=True)
class Steady:
    rate: float  # tasks/second

    def validate(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise WorkloadError(f"steady rate must be positive, got {self.rate}")

    def scaled(self, factor: float) -> "Steady":
        return Steady(rate=self.rate * factor)

    def mean_rate(self) -> float:
        return self.rate


@dataclass(frozen=True)
class Bursty:
    rate_low: float
    rate_high: float
    mean_dwell_low: float  # seconds
    mean_dwell_high: float

    def validate(self):
        if not (self.rate_low > 0 and math.isfinite(self.rate_low)):
            raise WorkloadError(f"rate_low must be positive, got {self.rate_low}")
        if not (self.rate_high >= self.rate_low and math.isfinite(self.rate_high)):
            raise WorkloadError(
                f"rate_high must be >= rate_low, got {self.rate_high} < {self.rate_low}")
        if not (self.mean_dwell_low > 0 and self.mean_dwell_high > 0):
            raise WorkloadError("dwell means must be positive")

    def scaled(self, factor: float) -> "Bursty":
        return Bursty(self.rate_low * factor, self.rate_high * factor,
                      self.mean_dwell_low, self.mean_dwell_high)

    def mean_rate(self) -> float:
        # long-run stationary mix of the two dwell states
        total = self.mean_dwell_low + self.mean_dwell_high
        return (self.rate_low * self.mean_dwell_low
                + self.rate_high * self.mean_dwell_high) / total


@dataclass(frozen=True)
class Exponential:
    mean: float

    def validate(self):
        if not (self.mean > 0 and math.isfinite(self.mean)):
            raise WorkloadError(f"size mean must be positive, got {self.mean}")

    def sample(self, rng, n):
        return rng.exponential(self.mean, n)

    def expected_mean(self) -> float:
        return self.mean


@dataclass(frozen=True)
class LogNormal:
    mu: float
    sigma: float

    def validate(self):
        if not self.sigma > 0:
            raise WorkloadError(f"lognormal sigma must be positive, got {self.sigma}")

    def sample(self, rng, n):
        return rng.lognormal(self.mu, self.sigma, n)

    def expected_mean(self) -> float:
        return math.exp(self.mu + self.sigma ** 2 / 2)


@dataclass(frozen=True)
class WorkloadSpec:
    kind: Union[Steady, Bursty]
    size_dist: Union[Exponential, LogNormal]
    horizon: float  # seconds

    def validate(self):
        self.kind.validate()
        self.size_dist.validate()
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise WorkloadError(f"horizon must be positive, got {self.horizon}")

    def scaled(self, factor: float) -> "WorkloadSpec":
        if not (factor > 0 and math.isfinite(factor)):
            raise WorkloadError(f"load multiplier must be positive, got {factor}")
        return WorkloadSpec(self.kind.scaled(factor), self.size_dist, self.horizon)

    def with_horizon(self, horizon: float) -> "WorkloadSpec":
        return WorkloadSpec(self.kind, self.size_dist, horizon)


@dataclass
class TaskTrace:
    tasks: list
    spec_fingerprint: str


def fingerprint(spec: WorkloadSpec, seed: int) -> str:
    canon = repr((spec.kind, spec.size_dist, spec.horizon, int(seed)))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _steady_arrivals(rate, horizon, rng):
    times = []
    t = 0.0
    expected = rate * horizon
    chunk = max(int(expected + 4 * math.sqrt(expected + 1)) + 16, 64)
    while t < horizon:
        gaps = rng.exponential(1.0 / rate, chunk)
        arr = t + np.cumsum(gaps)
        cut = np.searchsorted(arr, horizon, side="left")
        times.append(arr[:cut])
        if cut < len(arr):
            break
        t = float(arr[-1])
    return np.concatenate(times) if times else np.empty(0)


def _bursty_arrivals(kind: Bursty, horizon, rng_arrival, rng_burst):
    # count-then-place construction: arrivals in a dwell of length d at rate r
    # are Poisson(r*d) many, placed as sorted uniforms over the dwell
    chunks = []
    t = 0.0
    high = False
    while t < horizon:
        mean_dwell = kind.mean_dwell_high if high else kind.mean_dwell_low
        rate = kind.rate_high if high else kind.rate_low
        dwell_end = min(t + rng_burst.exponential(mean_dwell), horizon)
        n = rng_arrival.poisson(rate * (dwell_end - t))
        if n:
            chunks.append(np.sort(rng_arrival.uniform(t, dwell_end, n)))
        t = dwell_end
        high = not high
    return np.concatenate(chunks) if chunks else np.empty(0)


def generate_trace(spec: WorkloadSpec, seed: int) -> TaskTrace:
    """Materialize the full arrival trace for (spec, seed); pure function."""
    spec.validate()
    rng_arrival = seeds.stream(seed, seeds.ARRIVAL)
    rng_size = seeds.stream(seed, seeds.SIZE)

    if isinstance(spec.kind, Steady):
        times = _steady_arrivals(spec.kind.rate, spec.horizon, rng_arrival)
    else:
        rng_burst = seeds.stream(seed, seeds.BURST)
        times = _bursty_arrivals(spec.kind, spec.horizon, rng_arrival, rng_burst)

    sizes = spec.size_dist.sample(rng_size, len(times))
    # the exponential sampler can return exactly 0.0; sizes must stay positive
    sizes = np.maximum(sizes, np.finfo(float).tiny)

    tasks = [Task(i, float(t), float(s)) for i, (t, s) in enumerate(zip(times, sizes))]
    return TaskTrace(tasks=tasks, spec_fingerprint=fingerprint(spec, seed))


def generate_n_tasks(spec: WorkloadSpec, n: int, seed: int) -> TaskTrace:
    """First `n` arrivals of (spec, seed), extending the horizon as needed.

    Used for training traces, where the task budget (not the wall clock)
    bounds the run. Deterministic: each horizon retry regenerates from the
    same streams from scratch.
    """
    if n == 0:
        return TaskTrace(tasks=[], spec_fingerprint=fingerprint(spec, seed))
    horizon = max(spec.horizon, 1.25 * n / spec.kind.mean_rate())
    for _ in range(40):
        trace = generate_trace(spec.with_horizon(horizon), seed)
        if len(trace.tasks) >= n:
            trace.tasks = trace.tasks[:n]
            return trace
        horizon *= 2.0
    raise WorkloadError(f"could not reach {n} arrivals (rate too low?)")


def trace_stats(trace: TaskTrace) -> dict:
    """Sanity summary: {count, mean_interarrival, mean_size, peak_rate_estimate}.

    peak_rate_estimate is the max over 100-second sliding windows of
    arrivals/window; windows are anchored at each arrival, which attains the
    sliding maximum.
    """
    tasks = trace.tasks
    if not tasks:
        raise WorkloadError("trace_stats on empty trace")
    n = len(tasks)
    times = [t.arrival_time for t in tasks]
    mean_inter = (times[-1] - times[0]) / (n - 1) if n > 1 else None
    mean_size = sum(t.size for t in tasks) / n

    window = 100.0
    peak = 0
    j = 0
    for i in range(n):
        if j < i + 1:
            j = i + 1
        while j < n and times[j] < times[i] + window:
            j += 1
        peak = max(peak, j - i)
    return {
        "count": n,
        "mean_interarrival": mean_inter,
        "mean_size": mean_size,
        "peak_rate_estimate": peak / window,
    }


# ---------------------------------------------------------------------------
# trace file round-trip: task_id,arrival_time,size (sorted by arrival_time);
# floats written with repr so replayed traces are bit-identical
# ---------------------------------------------------------------------------

TRACE_CSV_HEADER = "task_id,arrival_time,size"


def write_trace_csv(trace: TaskTrace, path) -> None:
    with open(path, "w") as f:
        f.write(TRACE_CSV_HEADER + "\n")
        for t in trace.tasks:
            f.write(f"{t.id},{t.arrival_time!r},{t.size!r}\n")


def read_trace_csv(path) -> TaskTrace:
    tasks = []
    with open(path) as f:
        header = f.readline().strip()
        if header != TRACE_CSV_HEADER:
            raise TraceError(f"bad trace header {header!r}, expected {TRACE_CSV_HEADER!r}")
        for line in f:
            line = line.strip()
            if not line:
                continue
            tid, at, size = line.split(",")
            tasks.append(Task(int(tid), float(at), float(size)))
    validate_trace(tasks)
    return TaskTrace(tasks=tasks, spec_fingerprint="file:" + hashlib.sha256(
        str(path).encode()).hexdigest()[:16])
