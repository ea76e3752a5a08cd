"""Dispatch-policy interface and the three classic baselines.

All baselines are deterministic given call order and never touch the
exploration RNG handed to `choose`, so swapping baselines cannot perturb
any shared random stream.
"""

from .engine import ClusterSnapshot, ConfigurationError, Task


class Policy:
    """Behavior contract: `choose` picks a server for each arriving task,
    `on_completion` is a hook for policies that learn from feedback.

    A policy instance is owned by a single run and is fully reset by
    constructing it anew.
    """

    name = "policy"

    def choose(self, snap: ClusterSnapshot, task: Task, rng) -> int:
        raise NotImplementedError

    def on_completion(self, record, snap: ClusterSnapshot) -> None:
        pass


class RoundRobin(Policy):
    """Sequential rotation over the pool, ignoring state."""

    name = "round_robin"

    def __init__(self, n_servers: int):
        if n_servers < 1:
            raise ConfigurationError("round_robin needs at least one server")
        self.n_servers = n_servers
        self._counter = 0

    def choose(self, snap, task, rng):
        target = self._counter % self.n_servers
        self._counter += 1
        return target


class LeastConnections(Policy):
    """Server with the fewest active tasks (in service + queued); ties go to
    the lowest server id."""

    name = "least_connections"

    def choose(self, snap, task, rng):
        counts = snap.in_service
        queues = snap.queue_length
        best = 0
        best_count = counts[0] + queues[0]
        for i in range(1, len(counts)):
            c = counts[i] + queues[i]
            if c < best_count:
                best = i
                best_count = c
        return best


class SmoothWeightedRoundRobin(Policy):
    """Deficit-counter weighted rotation: each call adds every server's
    weight to its counter, picks the largest counter (tie: lowest id), and
    subtracts the weight total from the winner. With integer weights each
    cycle of sum(weights) calls selects server i exactly weight_i times."""

    name = "weighted"

    def __init__(self, weights):
        weights = list(weights)
        if not weights:
            raise ConfigurationError("weighted policy needs at least one server")
        for i, w in enumerate(weights):
            if not w > 0:
                raise ConfigurationError(f"weights must be positive, server {i} has {w}")
        self._weights = weights
        self._total = sum(weights)
        self._current = [0.0] * len(weights)

    def choose(self, snap, task, rng):
        current = self._current
        weights = self._weights
        best = 0
        current[0] += weights[0]
        best_val = current[0]
        for i in range(1, len(weights)):
            current[i] += weights[i]
            if current[i] > best_val:
                best = i
                best_val = current[i]
        current[best] -= self._total
        return best


BASELINE_NAMES = ("round_robin", "least_connections", "weighted")
POLICY_NAMES = BASELINE_NAMES + ("rl",)


def make_baseline(name: str, cluster_config) -> Policy:
    """Baseline factory; the weighted policy defaults its weights to the
    configured server weights (speed-proportional in the shipped configs)."""
    if name == "round_robin":
        return RoundRobin(len(cluster_config))
    if name == "least_connections":
        return LeastConnections()
    if name == "weighted":
        return SmoothWeightedRoundRobin([s.weight for s in cluster_config])
    raise ConfigurationError(
        f"unknown policy {name!r}; valid names: {', '.join(POLICY_NAMES)}")
