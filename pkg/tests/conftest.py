import textwrap

import pytest

from rl_balance.mdp import TabularMDP


@pytest.fixture
def toy_mdp():
    """4-state, 2-action deterministic ring.

    Action 0 advances one state and pays 10 on the 3 -> 0 wrap; action 1
    jumps two states for a flat 1. Strongly connected under any policy, so
    epsilon-greedy exploration covers every (s, a) pair quickly.
    """
    transitions = {}
    for s in range(4):
        transitions[(s, 0)] = ((s + 1) % 4, 10.0 if s == 3 else 0.0)
        transitions[(s, 1)] = ((s + 2) % 4, 1.0)
    return TabularMDP(n_states=4, n_actions=2, transitions=transitions)


TINY_CONFIG = textwrap.dedent("""\
    config_version: 1
    cluster:
      - {speed: 1.0, slots: 1, weight: 1.0}
      - {speed: 2.0, slots: 1, weight: 2.0}
    workload:
      arrivals: {kind: steady, rate: 2.0}
      sizes: {kind: exponential, mean: 1.0}
    policies: [round_robin, least_connections, weighted, rl]
    agent:
      epsilon_decay_tasks: 1000
    training_tasks: 2000
    evaluation_horizon: 200.0
    seeds: [3, 4]
    load_multipliers: [0.5, 1.0]
    """)


@pytest.fixture
def tiny_config_file(tmp_path):
    """Small, fast experiment config for CLI-level tests."""
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY_CONFIG)
    return path
