"""Tabular Q-learning load balancer.

The agent observes a discretized snapshot of the pool (per-server
utilization bins, an active-task bin, a system-load bin), assigns each
arriving task to a server via epsilon-greedy action selection, and learns
with the standard temporal-difference update

    Q(s,a) <- Q(s,a) + alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))

Credit assignment is delayed: (s, a) is captured at dispatch, while the
reward and successor state are observed when that task completes, because
the reward depends on response time, which is unknowable at dispatch.
The reward per completed task is

    r = -(response_time / t_ref) - kappa * (max util - min util)

so faster completions and a flatter pool both pay; issuing one reward per
completion makes higher throughput show up as more reward events.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .engine import ClusterSnapshot, run
from .metrics import CompletedTaskRecord
from .policies import Policy


class AgentError(ValueError):
    """Invalid agent configuration or corrupted learning input."""


class DiscreteState(NamedTuple):
    util_bins: tuple  # per server, each in [0, util_bins)
    active_bin: int  # active tasks per server, capped into [0, active_bins)
    load_bin: int  # system load bin in [0, util_bins)


@dataclass(frozen=True)
class RewardConfig:
    t_ref: float  # response-time normalizer, seconds
    kappa: float = 0.5  # imbalance penalty weight

    def validate(self):
        if not (self.t_ref > 0 and math.isfinite(self.t_ref)):
            raise AgentError(f"t_ref must be positive, got {self.t_ref}")
        if not (self.kappa >= 0 and math.isfinite(self.kappa)):
            raise AgentError(f"kappa must be non-negative, got {self.kappa}")


@dataclass(frozen=True)
class AgentConfig:
    alpha: float = 0.1  # learning rate, (0, 1]
    gamma: float = 0.9  # discount factor, [0, 1)
    epsilon_start: float = 0.2
    epsilon_end: float = 0.01
    epsilon_decay_tasks: int = 50_000
    util_bins: int = 3
    active_bins: int = 4
    reward: RewardConfig = RewardConfig(t_ref=1.0)

    def validate(self):
        if not 0 < self.alpha <= 1:
            raise AgentError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0 <= self.gamma < 1:
            raise AgentError(f"gamma must be in [0, 1), got {self.gamma}")
        for name in ("epsilon_start", "epsilon_end"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise AgentError(f"{name} must be in [0, 1], got {v}")
        if self.epsilon_end > self.epsilon_start:
            raise AgentError("epsilon_end must be <= epsilon_start")
        if self.epsilon_decay_tasks < 1:
            raise AgentError("epsilon_decay_tasks must be a positive integer")
        if self.util_bins < 1 or self.active_bins < 1:
            raise AgentError("util_bins and active_bins must be positive integers")
        self.reward.validate()


class QTable:
    """Sparse (state, action) -> value map; absent entries read as 0.0."""

    __slots__ = ("n_actions", "entries", "visit_counts")

    def __init__(self, n_actions: int):
        self.n_actions = n_actions
        self.entries = {}
        self.visit_counts = {}

    def get(self, state, action) -> float:
        return self.entries.get((state, action), 0.0)

    def max_value(self, state) -> float:
        get = self.entries.get
        return max(get((state, a), 0.0) for a in range(self.n_actions))

    def best_action(self, state) -> int:
        get = self.entries.get
        best = 0
        best_q = get((state, 0), 0.0)
        for a in range(1, self.n_actions):
            q = get((state, a), 0.0)
            if q > best_q:
                best = a
                best_q = q
        return best

    def __len__(self):
        return len(self.entries)


def discretize(snap: ClusterSnapshot, config: AgentConfig) -> DiscreteState:
    """Bin a snapshot: floor(u * B) clamped to B-1 per server and for system
    load; active tasks are first normalized per server, then binned."""
    b = config.util_bins
    top = b - 1
    util_bins = tuple(min(int(u * b), top) for u in snap.instant_utilization)
    load_bin = min(int(snap.system_load * b), top)
    n = len(snap.instant_utilization)
    active_bin = min(int(snap.active_tasks / n), config.active_bins - 1)
    return DiscreteState(util_bins, active_bin, load_bin)


def select_action(q: QTable, state, epsilon: float, rng) -> int:
    """Epsilon-greedy: one uniform draw decides the branch; exploring costs
    exactly one more. Exploitation argmax breaks ties toward the lowest id."""
    n = q.n_actions
    if rng.random() < epsilon:
        pick = int(rng.random() * n)
        return pick if pick < n else n - 1
    return q.best_action(state)


def compute_reward(record: CompletedTaskRecord, snap: ClusterSnapshot,
                   config: AgentConfig) -> float:
    utils = snap.instant_utilization
    imbalance = max(utils) - min(utils)
    return (-(record.response_time / config.reward.t_ref)
            - config.reward.kappa * imbalance)


def update_q(q: QTable, state, action, reward: float, next_state,
             config: AgentConfig) -> float:
    """One temporal-difference backup; returns the stored value."""
    if not math.isfinite(reward):
        raise AgentError(f"non-finite reward {reward}")
    key = (state, action)
    entries = q.entries
    old = entries.get(key, 0.0)
    new = old + config.alpha * (reward + config.gamma * q.max_value(next_state) - old)
    entries[key] = new
    q.visit_counts[key] = q.visit_counts.get(key, 0) + 1
    return new


class QLearningPolicy(Policy):
    """Q-table-driven dispatcher usable in two modes.

    Learning mode: epsilon decays linearly from epsilon_start to epsilon_end
    over the first epsilon_decay_tasks arrivals; each completion triggers a
    delayed-credit backup and feeds the learning curve (trailing
    1000-reward mean sampled every 1000 completions).

    Evaluation mode (learn=False): greedy over a frozen table; completions
    only clear dispatch bookkeeping.
    """

    name = "rl"
    CURVE_WINDOW = 1000

    def __init__(self, n_servers: int, config: AgentConfig, learn: bool = True,
                 qtable: Optional[QTable] = None):
        config.validate()
        self.config = config
        self.learn = learn
        self.q = qtable if qtable is not None else QTable(n_servers)
        if self.q.n_actions != n_servers:
            raise AgentError(
                f"q-table built for {self.q.n_actions} servers, cluster has {n_servers}")
        self._pending = {}  # task_id -> (state, action)
        self._arrivals = 0
        self._completions = 0
        self._recent_rewards = []
        self.learning_curve = []  # (tasks_seen, mean_reward_window)

    def current_epsilon(self) -> float:
        if not self.learn:
            return 0.0
        cfg = self.config
        frac = min(self._arrivals / cfg.epsilon_decay_tasks, 1.0)
        return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac

    def choose(self, snap, task, rng):
        state = discretize(snap, self.config)
        action = select_action(self.q, state, self.current_epsilon(), rng)
        self._pending[task.id] = (state, action)
        self._arrivals += 1
        return action

    def on_completion(self, record, snap):
        state, action = self._pending.pop(record.task_id)
        if not self.learn:
            return
        reward = compute_reward(record, snap, self.config)
        next_state = discretize(snap, self.config)
        update_q(self.q, state, action, reward, next_state, self.config)
        self._completions += 1
        recent = self._recent_rewards
        recent.append(reward)
        if len(recent) > self.CURVE_WINDOW:
            del recent[0]
        if self._completions % self.CURVE_WINDOW == 0:
            self.learning_curve.append(
                (self._completions, sum(recent) / len(recent)))


@dataclass
class TrainResult:
    q: QTable
    learning_curve: list  # (tasks_seen, mean_reward_window)


def train(cluster_config, trace, config: AgentConfig, seed: int) -> TrainResult:
    """Run the simulator with the learning agent in the dispatch loop over
    one long trace; reproducible for identical (trace, config, seed)."""
    agent = QLearningPolicy(len(cluster_config), config, learn=True)
    tasks = trace.tasks if hasattr(trace, "tasks") else trace
    if not tasks:
        return TrainResult(q=agent.q, learning_curve=[])
    horizon = tasks[-1].arrival_time + 1.0
    run(cluster_config, tasks, agent, horizon=horizon, seed=seed, collector=None)
    return TrainResult(q=agent.q, learning_curve=agent.learning_curve)


# ---------------------------------------------------------------------------
# persistence: versioned flat file, one row per entry
#   <state>\t<action>\t<q_value>\t<visit_count>
# state is "u0,u1,...|active|load"; floats use repr for bit-exact reload
# ---------------------------------------------------------------------------

QTABLE_MAGIC = "rl-balance-qtable"
QTABLE_VERSION = 1


def _state_str(state: DiscreteState) -> str:
    return ",".join(map(str, state.util_bins)) + f"|{state.active_bin}|{state.load_bin}"


def _parse_state(text: str) -> DiscreteState:
    utils, active, load = text.split("|")
    return DiscreteState(tuple(int(u) for u in utils.split(",")), int(active), int(load))


def save_qtable(q: QTable, path) -> None:
    rows = sorted(q.entries.items())
    with open(path, "w") as f:
        f.write(f"{QTABLE_MAGIC}\tv{QTABLE_VERSION}\tactions={q.n_actions}\n")
        for (state, action), value in rows:
            visits = q.visit_counts.get((state, action), 0)
            f.write(f"{_state_str(state)}\t{action}\t{value!r}\t{visits}\n")


def load_qtable(path) -> QTable:
    with open(path) as f:
        header = f.readline().rstrip("\n").split("\t")
        if len(header) != 3 or header[0] != QTABLE_MAGIC:
            raise AgentError(f"{path}: not a q-table file")
        if header[1] != f"v{QTABLE_VERSION}":
            raise AgentError(f"{path}: unsupported q-table version {header[1]}")
        q = QTable(int(header[2].removeprefix("actions=")))
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            state_text, action, value, visits = line.split("\t")
            key = (_parse_state(state_text), int(action))
            q.entries[key] = float(value)
            q.visit_counts[key] = int(visits)
    return q
