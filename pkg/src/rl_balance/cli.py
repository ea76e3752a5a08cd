"""Command-line experiment harness.

    rl-balance run      --config c.cfg [--policy NAME] [--seed N] [--out DIR] [--qtable F]
    rl-balance compare  --config c.cfg [--seed N] [--out DIR]
    rl-balance sweep    --config c.cfg [--seed N] [--out DIR]
    rl-balance train    --config c.cfg [--seed N] [--out DIR] [--qtable F]

Exit codes: 0 success, 2 usage or validation error, 1 runtime failure.

Evaluation and training traces come from disjoint streams derived from each
master seed, so the agent is never evaluated on the trace it trained on. In
`compare` and `sweep` every policy sees the identical evaluation trace per
seed; traces are regenerated from the derived seed inside each cell, which
yields bit-identical arrivals without shipping task lists between workers.

RL_BALANCE_THREADS > 1 runs (policy x seed) cells in a process pool; the
default is serial. Results are exported by a single writer in a fixed order
either way, so outputs are byte-stable regardless of the cap.
"""

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from .agent import (AgentError, QLearningPolicy, TrainResult, load_qtable,
                    save_qtable, train)
from .config import (ConfigError, ExperimentConfig, builtin_config_path,
                     load_config)
from .engine import ConfigurationError, SimulationError, TraceError, run
from .metrics import MetricsCollector, export, fmt, summarize
from .policies import POLICY_NAMES, make_baseline
from .seeds import TAG_EVAL_TRACE, TAG_TRAIN_TRACE, derive_seed
from .workload import WorkloadError, generate_n_tasks, generate_trace

LEARNING_CURVE_HEADER = "tasks_seen,mean_reward_window"
SWEEP_HEADER = "load_multiplier,policy,seed,mean_rt,p95_rt,completion_rate,std_util"


def thread_cap() -> int:
    raw = os.environ.get("RL_BALANCE_THREADS", "").strip()
    if not raw:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"RL_BALANCE_THREADS must be an integer, got {raw!r}")
    return max(cap, 1)


def _map_cells(fn, cells):
    """Run isolated simulation cells, in parallel when the env cap allows.

    Cells share nothing and results come back in submission order, so the
    pool cannot affect outputs.
    """
    cap = thread_cap()
    if cap <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=min(cap, len(cells))) as pool:
        return list(pool.map(fn, cells))


def _train_cell(cell):
    config, seed, multiplier = cell
    spec = config.workload if multiplier == 1.0 else config.workload.scaled(multiplier)
    trace = generate_n_tasks(spec, config.training_tasks,
                             derive_seed(seed, TAG_TRAIN_TRACE))
    return train(config.cluster, trace, config.agent, seed)


def _eval_cell(cell):
    config, policy_name, seed, multiplier, qtable = cell
    spec = config.workload if multiplier == 1.0 else config.workload.scaled(multiplier)
    trace = generate_trace(spec, derive_seed(seed, TAG_EVAL_TRACE))
    if policy_name == "rl":
        policy = QLearningPolicy(len(config.cluster), config.agent,
                                 learn=False, qtable=qtable)
    else:
        policy = make_baseline(policy_name, config.cluster)
    collector = MetricsCollector()
    result = run(config.cluster, trace.tasks, policy, config.evaluation_horizon,
                 seed, collector, policy_name)
    return summarize(result), result


def _train_tables(config: ExperimentConfig, seeds, multiplier=1.0) -> dict:
    """One trained QTable per seed; {} when rl is not among the policies."""
    if "rl" not in config.policies:
        return {}
    results = _map_cells(_train_cell, [(config, s, multiplier) for s in seeds])
    return {s: r.q for s, r in zip(seeds, results)}


def _compare_once(config: ExperimentConfig, multiplier=1.0):
    """All (policy, seed) summaries at one load level, seed-major order."""
    tables = _train_tables(config, config.seeds, multiplier)
    cells = [(config, policy, seed, multiplier, tables.get(seed))
             for seed in config.seeds for policy in config.policies]
    return _map_cells(_eval_cell, cells)


def _write_learning_curve(curve, path):
    with open(path, "w") as f:
        f.write(LEARNING_CURVE_HEADER + "\n")
        for tasks_seen, mean_reward in curve:
            f.write(f"{tasks_seen},{fmt(mean_reward)}\n")


def _median(values):
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    return ordered[mid] if n % 2 else 0.5 * (ordered[mid - 1] + ordered[mid])


def _print_ranked_table(summaries):
    """Per-policy medians over seeds, best mean response time first."""
    by_policy = {}
    for s in summaries:
        by_policy.setdefault(s.policy_name, []).append(s)
    rows = []
    for name, group in by_policy.items():
        rows.append((
            _median([s.mean_rt for s in group]),
            name,
            _median([s.p95_rt for s in group]),
            _median([s.completion_rate for s in group]),
            _median([s.std_util_across_servers for s in group]),
        ))
    rows.sort()
    width = max(len(name) for _, name, *_ in rows)
    print(f"{'policy':<{width}}  {'mean_rt':>12}  {'p95_rt':>12}  "
          f"{'completion_rate':>15}  {'std_util':>12}")
    for mean_rt, name, p95, rate, std in rows:
        print(f"{name:<{width}}  {fmt(mean_rt):>12}  {fmt(p95):>12}  "
              f"{fmt(rate):>15}  {fmt(std):>12}")


def _resolve_config_arg(arg: str) -> str:
    # bare names (no path separator, no extension) fall back to shipped configs
    if not os.path.exists(arg) and os.path.basename(arg) == arg and "." not in arg:
        return builtin_config_path(arg)
    return arg


def _load_and_override(args) -> ExperimentConfig:
    config = load_config(_resolve_config_arg(args.config))
    if getattr(args, "out", None):
        config = replace(config, out_dir=args.out)
    if getattr(args, "seed", None) is not None:
        config = replace(config, seeds=(args.seed,))
    return config


def cmd_run(args) -> int:
    config = _load_and_override(args)
    policy_name = args.policy or config.policies[0]
    if policy_name not in POLICY_NAMES:
        raise ConfigError(
            f"unknown policy {policy_name!r}; valid: {', '.join(POLICY_NAMES)}")
    seed = config.seeds[0]
    os.makedirs(config.out_dir, exist_ok=True)

    qtable = None
    if policy_name == "rl":
        if args.qtable:
            qtable = load_qtable(args.qtable)
        else:
            print(f"no --qtable given; training on {config.training_tasks} tasks first")
            trained = _train_cell((config, seed, 1.0))
            qtable = trained.q
            _write_learning_curve(trained.learning_curve,
                                  os.path.join(config.out_dir, "learning_curve.csv"))

    summary, result = _eval_cell((config, policy_name, seed, 1.0, qtable))
    export([(summary, result)], config.out_dir)
    print(f"{policy_name} seed {seed}: mean_rt {fmt(summary.mean_rt)}, "
          f"p95_rt {fmt(summary.p95_rt)}, completion_rate {fmt(summary.completion_rate)}")
    return 0


def cmd_compare(args) -> int:
    config = _load_and_override(args)
    if len(config.policies) < 2:
        raise ConfigError("compare needs at least two policies in the config")
    os.makedirs(config.out_dir, exist_ok=True)
    pairs = _compare_once(config)
    export(pairs, config.out_dir)
    _print_ranked_table([s for s, _ in pairs])
    return 0


def cmd_sweep(args) -> int:
    config = _load_and_override(args)
    if not config.load_multipliers:
        raise ConfigError("sweep needs a non-empty load_multipliers list in the config")
    os.makedirs(config.out_dir, exist_ok=True)

    path = os.path.join(config.out_dir, "sweep.csv")
    with open(path, "w") as f:
        f.write(SWEEP_HEADER + "\n")
        for multiplier in config.load_multipliers:
            print(f"load multiplier {fmt(multiplier)} ...")
            for summary, _ in _compare_once(config, multiplier):
                f.write(f"{fmt(multiplier)},{summary.policy_name},{summary.seed},"
                        f"{fmt(summary.mean_rt)},{fmt(summary.p95_rt)},"
                        f"{fmt(summary.completion_rate)},"
                        f"{fmt(summary.std_util_across_servers)}\n")
    print(f"wrote {path}")
    return 0


def cmd_train(args) -> int:
    config = _load_and_override(args)
    seed = config.seeds[0]
    os.makedirs(config.out_dir, exist_ok=True)
    if config.training_tasks == 0:
        print("warning: training_tasks is 0; persisting an empty table", file=sys.stderr)

    trained = _train_cell((config, seed, 1.0))
    qtable_path = args.qtable or os.path.join(config.out_dir, "qtable.txt")
    save_qtable(trained.q, qtable_path)
    curve_path = os.path.join(config.out_dir, "learning_curve.csv")
    _write_learning_curve(trained.learning_curve, curve_path)
    print(f"trained on {config.training_tasks} tasks (seed {seed}); "
          f"{len(trained.q)} table entries -> {qtable_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rl-balance",
        description="Simulated server-pool load balancing experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, policy=False, qtable=None):
        p.add_argument("--config", required=True,
                       help="experiment config file, or a built-in name (desk6, paper10)")
        p.add_argument("--seed", type=int, help="override the config's seed list")
        p.add_argument("--out", help="override the config's output directory")
        if policy:
            p.add_argument("--policy", help="policy to run (default: first in config)")
        if qtable:
            p.add_argument("--qtable", help=qtable)

    p = sub.add_parser("run", help="one policy, one seed")
    common(p, policy=True, qtable="load a previously trained table instead of training")
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("compare", help="all configured policies on shared traces")
    common(p)
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("sweep", help="compare across the config's load multipliers")
    common(p)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("train", help="train the learner and persist its table")
    common(p, qtable="where to write the trained table (default: <out>/qtable.txt)")
    p.set_defaults(handler=cmd_train)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, ConfigurationError, WorkloadError, AgentError, TraceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SimulationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
