"""Small explicit MDPs and a value-iteration solver.

Verification harness for the tabular learner: run the production
select_action/update_q loop on a finite deterministic MDP and compare the
learned table against the Bellman-optimal Q* from value iteration.
"""

from dataclasses import dataclass

import numpy as np

from .agent import AgentConfig, QTable, select_action, update_q


@dataclass(frozen=True)
class TabularMDP:
    """Deterministic finite MDP; transitions maps every (state, action)
    pair to (next_state, reward)."""

    n_states: int
    n_actions: int
    transitions: dict

    def validate(self):
        if self.n_states < 1 or self.n_actions < 1:
            raise ValueError("MDP needs at least one state and one action")
        for s in range(self.n_states):
            for a in range(self.n_actions):
                if (s, a) not in self.transitions:
                    raise ValueError(f"transition missing for state {s}, action {a}")
                ns, r = self.transitions[(s, a)]
                if not 0 <= ns < self.n_states:
                    raise ValueError(f"({s}, {a}) leads to unknown state {ns}")
                if not np.isfinite(r):
                    raise ValueError(f"({s}, {a}) has non-finite reward {r}")

    def step(self, state, action):
        return self.transitions[(state, action)]


def value_iteration(mdp: TabularMDP, gamma: float, tolerance: float = 1e-12) -> dict:
    """Synchronous Bellman optimality backups until the max-norm change
    drops below tolerance; returns Q* keyed by (state, action)."""
    if not 0 <= gamma < 1:
        raise ValueError(f"gamma must be in [0, 1), got {gamma}")
    if tolerance <= 0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    mdp.validate()
    pairs = [(s, a) for s in range(mdp.n_states) for a in range(mdp.n_actions)]
    q = {key: 0.0 for key in pairs}
    while True:
        new = {}
        delta = 0.0
        for s, a in pairs:
            ns, r = mdp.transitions[(s, a)]
            value = r + gamma * max(q[(ns, ap)] for ap in range(mdp.n_actions))
            new[(s, a)] = value
            delta = max(delta, abs(value - q[(s, a)]))
        q = new
        if delta < tolerance:
            return q


def q_learning_on_mdp(mdp: TabularMDP, config: AgentConfig, steps: int,
                      epsilon: float, seed: int, start_state: int = 0) -> QTable:
    """Run the learner's own action-selection and update rules for a fixed
    number of steps along one continuing trajectory."""
    mdp.validate()
    rng = np.random.default_rng(seed)
    q = QTable(mdp.n_actions)
    state = start_state
    for _ in range(steps):
        action = select_action(q, state, epsilon, rng)
        next_state, reward = mdp.transitions[(state, action)]
        update_q(q, state, action, reward, next_state, config)
        state = next_state
    return q


def max_norm_gap(q: QTable, q_star: dict) -> float:
    """Largest absolute disagreement over the oracle's key set."""
    return max(abs(q.get(s, a) - v) for (s, a), v in q_star.items())
