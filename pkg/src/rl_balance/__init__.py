"""Discrete-event simulation of a heterogeneous server pool with pluggable
dispatch policies, including a tabular Q-learning balancer, and a CLI
harness for comparative experiments."""

__version__ = "0.1.0"

from .agent import AgentConfig, QLearningPolicy, QTable, RewardConfig, train
from .config import ExperimentConfig, load_config
from .engine import ServerSpec, Task, run
from .metrics import MetricsCollector, RunSummary, summarize
from .policies import LeastConnections, RoundRobin, SmoothWeightedRoundRobin
from .workload import Bursty, Exponential, LogNormal, Steady, WorkloadSpec, generate_trace

__all__ = [
    "AgentConfig", "Bursty", "Exponential", "ExperimentConfig",
    "LeastConnections", "LogNormal", "MetricsCollector", "QLearningPolicy",
    "QTable", "RewardConfig", "RoundRobin", "RunSummary", "ServerSpec",
    "SmoothWeightedRoundRobin", "Steady", "Task", "WorkloadSpec",
    "generate_trace", "load_config", "run", "summarize", "train",
]
