"""Experiment configuration.

One YAML document drives every command. The schema is versioned
(config_version: 1) and strict: unknown keys anywhere are errors that name
the offending keys, because a silently ignored typo in an experiment config
ruins reproducibility.

Schema sketch:

    config_version: 1
    cluster:                 # server_id is the list position
      - {speed: 1.0, slots: 1, weight: 1.0}
    workload:
      arrivals: {kind: steady, rate: 0.5}
               # or {kind: bursty, rate_low: .., rate_high: ..,
               #     mean_dwell_low: .., mean_dwell_high: ..}
      sizes: {kind: exponential, mean: 1.0}
               # or {kind: lognormal, mu: .., sigma: ..}
    policies: [round_robin, least_connections, weighted, rl]
    agent: {alpha: 0.1, gamma: 0.9, epsilon_start: 0.2, epsilon_end: 0.01,
            epsilon_decay_tasks: ..,  # default: half of training_tasks
            util_bins: 3, active_bins: 4, reward: {t_ref: .., kappa: 0.5}}
    training_tasks: 200000
    evaluation_horizon: 2000.0
    seeds: [1, 2, 3, 4, 5]
    out_dir: results
    load_multipliers: [0.6, 0.8, 1.0, 1.1]   # sweep only

t_ref defaults to mean task size / mean server speed, i.e. the service time
a typical task would see on a typical server, so a reward of -1 per task
roughly means "took one nominal service time".
"""

import os
from dataclasses import dataclass, field

import yaml

from .agent import AgentConfig, RewardConfig
from .engine import ServerSpec, validate_cluster
from .policies import POLICY_NAMES
from .workload import Bursty, Exponential, LogNormal, Steady, WorkloadSpec

CONFIG_VERSION = 1


class ConfigError(ValueError):
    """Malformed or invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    cluster: tuple  # ServerSpec per server
    workload: WorkloadSpec  # horizon already set to evaluation_horizon
    policies: tuple
    agent: AgentConfig
    training_tasks: int
    evaluation_horizon: float
    seeds: tuple
    out_dir: str = "results"
    load_multipliers: tuple = field(default=())

    def validate(self):
        validate_cluster(self.cluster)
        self.workload.validate()
        if not self.policies:
            raise ConfigError("policies: need at least one policy")
        for name in self.policies:
            if name not in POLICY_NAMES:
                raise ConfigError(
                    f"policies: unknown policy {name!r}; valid: {', '.join(POLICY_NAMES)}")
        if len(set(self.policies)) != len(self.policies):
            raise ConfigError("policies: duplicates not allowed")
        self.agent.validate()
        if self.training_tasks < 0:
            raise ConfigError(f"training_tasks must be >= 0, got {self.training_tasks}")
        if not self.evaluation_horizon > 0:
            raise ConfigError(
                f"evaluation_horizon must be positive, got {self.evaluation_horizon}")
        if not self.seeds:
            raise ConfigError("seeds: need at least one seed")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds: duplicates not allowed (output files would collide)")
        for m in self.load_multipliers:
            if not m > 0:
                raise ConfigError(f"load_multipliers: must be positive, got {m}")


def _require_map(value, context):
    if not isinstance(value, dict):
        raise ConfigError(f"{context}: expected a mapping, got {type(value).__name__}")
    return value


def _check_keys(mapping, allowed, context):
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError(
            f"{context}: unknown key(s) {', '.join(map(str, unknown))}"
            f" (allowed: {', '.join(allowed)})")


def _number(mapping, key, context, default=None, required=False):
    if key not in mapping:
        if required:
            raise ConfigError(f"{context}: missing required key {key!r}")
        return default
    value = mapping[key]
    # bool passes isinstance(int) but "slots: true" is a config bug
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{context}.{key}: expected a number, got {value!r}")
    return value


def _integer(mapping, key, context, default=None, required=False):
    value = _number(mapping, key, context, default=default, required=required)
    if value is not None and not isinstance(value, int):
        raise ConfigError(f"{context}.{key}: expected an integer, got {value!r}")
    return value


def _parse_cluster(raw):
    if not isinstance(raw, list) or not raw:
        raise ConfigError("cluster: expected a non-empty list of server entries")
    specs = []
    for i, entry in enumerate(raw):
        ctx = f"cluster[{i}]"
        entry = _require_map(entry, ctx)
        _check_keys(entry, ("speed", "slots", "weight"), ctx)
        speed = _number(entry, "speed", ctx, required=True)
        slots = _integer(entry, "slots", ctx, default=1)
        weight = _number(entry, "weight", ctx, default=1.0)
        specs.append(ServerSpec(server_id=i, speed=float(speed), slots=slots,
                                weight=float(weight)))
    return tuple(specs)


def _parse_arrivals(raw):
    raw = _require_map(raw, "workload.arrivals")
    kind = raw.get("kind")
    if kind == "steady":
        _check_keys(raw, ("kind", "rate"), "workload.arrivals")
        return Steady(rate=float(_number(raw, "rate", "workload.arrivals", required=True)))
    if kind == "bursty":
        keys = ("kind", "rate_low", "rate_high", "mean_dwell_low", "mean_dwell_high")
        _check_keys(raw, keys, "workload.arrivals")
        vals = {k: float(_number(raw, k, "workload.arrivals", required=True))
                for k in keys[1:]}
        return Bursty(**vals)
    raise ConfigError(
        f"workload.arrivals.kind: expected 'steady' or 'bursty', got {kind!r}")


def _parse_sizes(raw):
    raw = _require_map(raw, "workload.sizes")
    kind = raw.get("kind")
    if kind == "exponential":
        _check_keys(raw, ("kind", "mean"), "workload.sizes")
        return Exponential(mean=float(_number(raw, "mean", "workload.sizes", required=True)))
    if kind == "lognormal":
        _check_keys(raw, ("kind", "mu", "sigma"), "workload.sizes")
        return LogNormal(mu=float(_number(raw, "mu", "workload.sizes", required=True)),
                         sigma=float(_number(raw, "sigma", "workload.sizes", required=True)))
    raise ConfigError(
        f"workload.sizes.kind: expected 'exponential' or 'lognormal', got {kind!r}")


def default_t_ref(cluster, size_dist) -> float:
    mean_speed = sum(s.speed for s in cluster) / len(cluster)
    return size_dist.expected_mean() / mean_speed


def _parse_agent(raw, cluster, size_dist, training_tasks):
    raw = _require_map(raw, "agent") if raw is not None else {}
    allowed = ("alpha", "gamma", "epsilon_start", "epsilon_end",
               "epsilon_decay_tasks", "util_bins", "active_bins", "reward")
    _check_keys(raw, allowed, "agent")

    reward_raw = raw.get("reward")
    reward_raw = _require_map(reward_raw, "agent.reward") if reward_raw is not None else {}
    _check_keys(reward_raw, ("t_ref", "kappa"), "agent.reward")
    t_ref = _number(reward_raw, "t_ref", "agent.reward",
                    default=default_t_ref(cluster, size_dist))
    kappa = _number(reward_raw, "kappa", "agent.reward", default=0.5)

    # exploration winds down over the first half of training unless pinned
    decay_default = max(training_tasks // 2, 1)
    return AgentConfig(
        alpha=float(_number(raw, "alpha", "agent", default=0.1)),
        gamma=float(_number(raw, "gamma", "agent", default=0.9)),
        epsilon_start=float(_number(raw, "epsilon_start", "agent", default=0.2)),
        epsilon_end=float(_number(raw, "epsilon_end", "agent", default=0.01)),
        epsilon_decay_tasks=_integer(raw, "epsilon_decay_tasks", "agent",
                                     default=decay_default),
        util_bins=_integer(raw, "util_bins", "agent", default=3),
        active_bins=_integer(raw, "active_bins", "agent", default=4),
        reward=RewardConfig(t_ref=float(t_ref), kappa=float(kappa)),
    )


TOP_LEVEL_KEYS = ("config_version", "cluster", "workload", "policies", "agent",
                  "training_tasks", "evaluation_horizon", "seeds", "out_dir",
                  "load_multipliers")


def parse_config(doc) -> ExperimentConfig:
    doc = _require_map(doc, "config")
    _check_keys(doc, TOP_LEVEL_KEYS, "config")

    version = doc.get("config_version")
    if version != CONFIG_VERSION:
        raise ConfigError(
            f"config_version: expected {CONFIG_VERSION}, got {version!r}")

    for key in ("cluster", "workload", "policies", "evaluation_horizon", "seeds"):
        if key not in doc:
            raise ConfigError(f"config: missing required key {key!r}")

    cluster = _parse_cluster(doc["cluster"])

    workload_raw = _require_map(doc["workload"], "workload")
    _check_keys(workload_raw, ("arrivals", "sizes"), "workload")
    for key in ("arrivals", "sizes"):
        if key not in workload_raw:
            raise ConfigError(f"workload: missing required key {key!r}")
    arrivals = _parse_arrivals(workload_raw["arrivals"])
    sizes = _parse_sizes(workload_raw["sizes"])

    horizon = _number(doc, "evaluation_horizon", "config", required=True)

    policies_raw = doc["policies"]
    if not isinstance(policies_raw, list):
        raise ConfigError("policies: expected a list of policy names")

    seeds_raw = doc["seeds"]
    if not isinstance(seeds_raw, list):
        raise ConfigError("seeds: expected a list of integers")
    seeds = []
    for i, s in enumerate(seeds_raw):
        if isinstance(s, bool) or not isinstance(s, int):
            raise ConfigError(f"seeds[{i}]: expected an integer, got {s!r}")
        seeds.append(s)

    training_tasks = _integer(doc, "training_tasks", "config", default=0)

    multipliers_raw = doc.get("load_multipliers", [])
    if not isinstance(multipliers_raw, list):
        raise ConfigError("load_multipliers: expected a list of numbers")
    multipliers = []
    for i, m in enumerate(multipliers_raw):
        if isinstance(m, bool) or not isinstance(m, (int, float)):
            raise ConfigError(f"load_multipliers[{i}]: expected a number, got {m!r}")
        multipliers.append(float(m))

    out_dir = doc.get("out_dir", "results")
    if not isinstance(out_dir, str):
        raise ConfigError(f"out_dir: expected a string, got {out_dir!r}")

    config = ExperimentConfig(
        cluster=cluster,
        workload=WorkloadSpec(kind=arrivals, size_dist=sizes, horizon=float(horizon)),
        policies=tuple(policies_raw),
        agent=_parse_agent(doc.get("agent"), cluster, sizes, training_tasks),
        training_tasks=training_tasks,
        evaluation_horizon=float(horizon),
        seeds=tuple(seeds),
        out_dir=out_dir,
        load_multipliers=tuple(multipliers),
    )
    config.validate()
    return config


def builtin_config_path(name: str) -> str:
    """Filesystem path of a shipped reference config ('desk6' or 'paper10')."""
    path = os.path.join(os.path.dirname(__file__), "configs", f"{name}.cfg")
    if not os.path.exists(path):
        raise ConfigError(f"no built-in config named {name!r}")
    return path


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as f:
            doc = yaml.safe_load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    try:
        return parse_config(doc)
    except ValueError as exc:  # nested validators raise their own ValueErrors
        raise ConfigError(f"{path}: {exc}") from exc
