import pytest

pytest.importorskip("balance_plots", reason="plots package not installed")

SWEEP_TEXT = """\
load_multiplier,policy,seed,mean_rt,p95_rt,completion_rate,std_util
0.8,round_robin,1,4.0,9.0,0.99,0.21
0.8,round_robin,2,6.0,11.0,0.97,0.23
0.8,rl,1,1.5,3.0,1,0.07
0.8,rl,2,2.5,4.0,0.98,0.09
1.1,round_robin,1,250.0,600.0,0.81,0.2
1.1,round_robin,2,300.0,700.0,0.79,0.22
1.1,rl,1,30.0,90.0,0.97,0.1
1.1,rl,2,50.0,120.0,0.95,0.12
"""

SUMMARY_TEXT = """\
[
  {
    "policy_name": "round_robin",
    "seed": 1,
    "tasks_arrived": 100,
    "tasks_completed_in_window": 99,
    "completion_rate": 0.99,
    "mean_rt": 4.0,
    "p50_rt": 2.0,
    "p95_rt": 9.0,
    "p99_rt": 12.0,
    "mean_util": 0.8,
    "std_util_across_servers": 0.21
  },
  {
    "policy_name": "rl",
    "seed": 1,
    "tasks_arrived": 100,
    "tasks_completed_in_window": 100,
    "completion_rate": 1.0,
    "mean_rt": 1.5,
    "p50_rt": 1.0,
    "p95_rt": 3.0,
    "p99_rt": 4.0,
    "mean_util": 0.78,
    "std_util_across_servers": 0.07
  }
]
"""


@pytest.fixture
def sweep_csv(tmp_path):
    path = tmp_path / "sweep.csv"
    path.write_text(SWEEP_TEXT)
    return path


@pytest.fixture
def summary_json(tmp_path):
    path = tmp_path / "summary.json"
    path.write_text(SUMMARY_TEXT)
    return path
