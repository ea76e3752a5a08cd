"""Deterministic discrete-event engine for a heterogeneous server pool.

Simulated time jumps between instantaneous events (task arrivals, service
completions) kept in a priority queue ordered by (time, insertion sequence).
Each server runs `slots` parallel service positions over an unbounded FIFO
wait queue; service time is size/speed, so all randomness lives in the
workload and in policy exploration, never in the engine itself.
"""

import heapq
import math
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .metrics import CompletedTaskRecord, MetricsCollector, RunResult
from .seeds import EXPLORE, stream

ARRIVAL = 0
COMPLETION = 1
END_OF_HORIZON = 2


class SimulationError(RuntimeError):
    """Engine invariant violated; indicates a scheduler or accounting bug."""


class ConfigurationError(ValueError):
    """Invalid cluster configuration or dispatch target."""


class TraceError(ValueError):
    """Malformed task trace (unsorted, bad ids, non-positive sizes)."""


@dataclass(slots=True)
class Task:
    id: int
    arrival_time: float
    size: float  # abstract work units, > 0
    deadline_window: Optional[float] = None


@dataclass(frozen=True, slots=True)
class ServerSpec:
    server_id: int
    speed: float  # work units per second
    slots: int = 1
    weight: float = 1.0


def validate_cluster(specs) -> None:
    if not specs:
        raise ConfigurationError("cluster must contain at least one server")
    for i, spec in enumerate(specs):
        if spec.server_id != i:
            raise ConfigurationError(
                f"server_ids must be exactly 0..{len(specs) - 1} with no gaps; "
                f"position {i} has id {spec.server_id}")
        if not (spec.speed > 0 and math.isfinite(spec.speed)):
            raise ConfigurationError(f"server {i}: speed must be positive, got {spec.speed}")
        if spec.slots < 1:
            raise ConfigurationError(f"server {i}: slots must be >= 1, got {spec.slots}")
        if not (spec.weight > 0 and math.isfinite(spec.weight)):
            raise ConfigurationError(f"server {i}: weight must be positive, got {spec.weight}")


class ServerState:
    """One server's live accounting: tasks in service, FIFO wait queue, and
    cumulative busy slot-seconds (for time-averaged utilization)."""

    __slots__ = ("spec", "in_service", "wait_queue", "busy_work_time", "_last_change")

    def __init__(self, spec: ServerSpec):
        self.spec = spec
        self.in_service = {}  # task_id -> (task, service_end_time, start_time)
        self.wait_queue = deque()
        self.busy_work_time = 0.0
        self._last_change = 0.0

    def settle(self, now: float) -> None:
        """Fold occupied-slot time up to `now` into busy_work_time.

        Must be called with the pre-change occupancy before any change to
        in_service."""
        self.busy_work_time += len(self.in_service) * (now - self._last_change)
        self._last_change = now

    def busy_time_at(self, t: float) -> float:
        """Busy slot-seconds accumulated on [0, t] without mutating state."""
        return self.busy_work_time + len(self.in_service) * (t - self._last_change)


class Event(NamedTuple):
    time: float
    seq: int
    kind: int  # ARRIVAL | COMPLETION | END_OF_HORIZON
    payload: object  # Task | (server_id, task_id) | None


class EventQueue:
    """Min-heap of events totally ordered by (time, seq); seq is a global
    insertion counter, so equal-time events pop in push order."""

    __slots__ = ("_heap", "_seq", "now")

    def __init__(self):
        self._heap = []
        self._seq = 0
        self.now = 0.0

    def __len__(self):
        return len(self._heap)

    def push(self, time: float, kind: int, payload=None) -> None:
        if time < self.now:
            raise SimulationError(
                f"event scheduled at t={time} before current time t={self.now}")
        heapq.heappush(self._heap, Event(time, self._seq, kind, payload))
        self._seq += 1

    def pop(self) -> Optional[Event]:
        if not self._heap:
            return None
        event = heapq.heappop(self._heap)
        self.now = event.time
        return event


class ClusterSnapshot(NamedTuple):
    """Instantaneous pool state; the raw material for dispatch decisions."""

    now: float
    instant_utilization: tuple  # per server, occupied slots / slots, in [0, 1]
    queue_length: tuple  # per server
    in_service: tuple  # per server, occupied slot count
    active_tasks: int  # tasks in service or queued, pool-wide
    system_load: float  # mean of instant_utilization


def snapshot(cluster, now: float) -> ClusterSnapshot:
    """Pure read of the pool at time `now`."""
    counts = [len(s.in_service) for s in cluster]
    queues = [len(s.wait_queue) for s in cluster]
    utils = [c / s.spec.slots for c, s in zip(counts, cluster)]
    return ClusterSnapshot(
        now=now,
        instant_utilization=tuple(utils),
        queue_length=tuple(queues),
        in_service=tuple(counts),
        active_tasks=sum(counts) + sum(queues),
        system_load=sum(utils) / len(utils),
    )


def assign_task(cluster, task: Task, target: int, now: float) -> Optional[float]:
    """Dispatch `task` to server `target`.

    Starts service immediately when a slot is free and returns the service
    end time (the caller schedules the Completion event); otherwise appends
    the task to the target's FIFO wait queue and returns None.
    """
    if not 0 <= target < len(cluster):
        raise ConfigurationError(
            f"dispatch to unknown server {target} (cluster has {len(cluster)} servers)")
    server = cluster[target]
    if len(server.in_service) < server.spec.slots:
        server.settle(now)
        end = now + task.size / server.spec.speed
        server.in_service[task.id] = (task, end, now)
        return end
    server.wait_queue.append(task)
    return None


def complete_task(cluster, server_id: int, task_id: int, now: float):
    """Finish `task_id` on `server_id` at `now`.

    Returns (record, next) where `next` is (task_id, service_end_time) for
    the wait-queue head promoted into the freed slot, or None.
    """
    server = cluster[server_id]
    entry = server.in_service.get(task_id)
    if entry is None:
        raise SimulationError(
            f"completion for task {task_id} not in service on server {server_id}")
    task, end, start = entry
    if end != now:
        raise SimulationError(
            f"completion for task {task_id} fired at t={now}, scheduled t={end}")
    server.settle(now)
    del server.in_service[task_id]
    record = CompletedTaskRecord(
        task_id=task_id,
        server_id=server_id,
        arrival_time=task.arrival_time,
        start_time=start,
        completion_time=now,
        response_time=now - task.arrival_time,
    )
    nxt = None
    if server.wait_queue:
        head = server.wait_queue.popleft()
        head_end = now + head.size / server.spec.speed
        server.in_service[head.id] = (head, head_end, now)
        nxt = (head.id, head_end)
    return record, nxt


def validate_trace(tasks) -> None:
    prev_t = -math.inf
    prev_id = -1
    for task in tasks:
        if task.arrival_time < prev_t:
            raise TraceError(f"trace not sorted by arrival_time at task {task.id}")
        if task.id <= prev_id:
            raise TraceError(f"task ids must be strictly increasing, got {task.id} after {prev_id}")
        if not task.size > 0:
            raise TraceError(f"task {task.id} has non-positive size {task.size}")
        prev_t = task.arrival_time
        prev_id = task.id


def run(cluster_config, trace, policy, horizon: float, seed: int,
        collector: Optional[MetricsCollector] = None,
        policy_name: str = "") -> RunResult:
    """Simulate one run: every arrival <= horizon is dispatched by
    `policy.choose` over the current snapshot; completions are processed to
    drainage even past the horizon so their records exist.

    Identical (cluster_config, trace, policy state, seed) reproduce
    bit-identical results; the only randomness offered to the policy is the
    per-run EXPLORE stream passed into `choose`.
    """
    if not horizon > 0:
        raise ConfigurationError(f"horizon must be positive, got {horizon}")
    validate_cluster(cluster_config)
    tasks = trace.tasks if hasattr(trace, "tasks") else trace
    validate_trace(tasks)

    cluster = [ServerState(spec) for spec in cluster_config]
    rng = stream(seed, EXPLORE)
    queue = EventQueue()
    queue.push(horizon, END_OF_HORIZON)

    n_tasks = len(tasks)
    next_arrival = 0
    if n_tasks and tasks[0].arrival_time <= horizon:
        queue.push(tasks[0].arrival_time, ARRIVAL, tasks[0])
        next_arrival = 1

    sample_every = collector.sample_every if collector is not None else None
    next_sample = sample_every if sample_every else math.inf

    arrived = 0
    final_util = None
    choose = policy.choose
    on_completion = policy.on_completion
    record_completion = collector.record_completion if collector is not None else None

    while True:
        event = queue.pop()
        if event is None:
            break
        now = event.time

        while next_sample <= now and next_sample <= horizon:
            collector.sample_utilization(cluster, next_sample)
            next_sample += sample_every

        kind = event.kind
        if kind == ARRIVAL:
            task = event.payload
            arrived += 1
            snap = snapshot(cluster, now)
            target = choose(snap, task, rng)
            end = assign_task(cluster, task, target, now)
            if end is not None:
                queue.push(end, COMPLETION, (target, task.id))
            if next_arrival < n_tasks:
                nxt_task = tasks[next_arrival]
                if nxt_task.arrival_time <= horizon:
                    queue.push(nxt_task.arrival_time, ARRIVAL, nxt_task)
                    next_arrival += 1
        elif kind == COMPLETION:
            server_id, task_id = event.payload
            record, nxt = complete_task(cluster, server_id, task_id, now)
            if nxt is not None:
                queue.push(nxt[1], COMPLETION, (server_id, nxt[0]))
            if record_completion is not None:
                record_completion(record)
            on_completion(record, snapshot(cluster, now))
        else:  # END_OF_HORIZON: freeze window accounting, keep draining
            final_util = [
                s.busy_time_at(horizon) / (horizon * s.spec.slots) for s in cluster
            ]

    return RunResult(
        policy_name=policy_name or getattr(policy, "name", type(policy).__name__),
        seed=seed,
        horizon=horizon,
        tasks_arrived=arrived,
        records=collector.records if collector is not None else [],
        samples=collector.samples if collector is not None else [],
        final_time_avg_util=final_util if final_util is not None else [0.0] * len(cluster),
    )
