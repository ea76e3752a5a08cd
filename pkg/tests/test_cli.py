import json
import os
import subprocess
import sys

import pytest

from rl_balance.cli import LEARNING_CURVE_HEADER, SWEEP_HEADER, main, thread_cap
from rl_balance.config import ConfigError


def invoke(*argv):
    return main(list(argv))


def read(path):
    with open(path, "rb") as f:
        return f.read()


def test_run_writes_expected_files(tiny_config_file, tmp_path, capsys):
    out = tmp_path / "out"
    rc = invoke("run", "--config", str(tiny_config_file), "--out", str(out),
                "--policy", "round_robin")
    assert rc == 0
    assert sorted(os.listdir(out)) == [
        "summary.json", "tasks_round_robin_3.csv", "util_round_robin_3.csv"]
    payload = json.loads(read(out / "summary.json"))
    assert len(payload) == 1
    assert payload[0]["policy_name"] == "round_robin" and payload[0]["seed"] == 3
    assert "mean_rt" in capsys.readouterr().out


def test_run_defaults_to_first_policy_and_honors_seed_override(tiny_config_file, tmp_path):
    out = tmp_path / "o"
    rc = invoke("run", "--config", str(tiny_config_file), "--out", str(out), "--seed", "9")
    assert rc == 0
    assert (out / "tasks_round_robin_9.csv").exists()


def test_run_unknown_policy_exits_2_and_lists_names(tiny_config_file, tmp_path, capsys):
    rc = invoke("run", "--config", str(tiny_config_file),
                "--out", str(tmp_path / "x"), "--policy", "slowest_first")
    assert rc == 2
    err = capsys.readouterr().err
    assert "slowest_first" in err and "least_connections" in err


def test_missing_config_file_exits_2(tmp_path, capsys):
    rc = invoke("run", "--config", str(tmp_path / "nope.cfg"))
    assert rc == 2
    assert "nope.cfg" in capsys.readouterr().err


def test_bare_config_name_resolves_to_builtin(tmp_path, capsys):
    rc = invoke("run", "--config", "desk6", "--out", str(tmp_path / "out"),
                "--policy", "weighted", "--seed", "1")
    assert rc == 0
    assert (tmp_path / "out" / "summary.json").exists()


def test_unknown_bare_config_name_exits_2(capsys):
    rc = invoke("run", "--config", "desk7")
    assert rc == 2
    assert "desk7" in capsys.readouterr().err


def test_invalid_config_exits_2(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("config_version: 1\ncluster: []\n")
    rc = invoke("run", "--config", str(p))
    assert rc == 2


def test_unwritable_out_dir_exits_1(tiny_config_file, tmp_path, capsys):
    collision = tmp_path / "not_a_dir"
    collision.write_text("occupied")
    rc = invoke("run", "--config", str(tiny_config_file), "--out", str(collision),
                "--policy", "round_robin")
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_run_is_byte_deterministic(tiny_config_file, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert invoke("run", "--config", str(tiny_config_file), "--out", str(out),
                      "--policy", "weighted") == 0
    for name in sorted(os.listdir(a)):
        assert read(a / name) == read(b / name), f"{name} differs between runs"


def test_rl_run_trains_inline_then_reuses_saved_table(tiny_config_file, tmp_path, capsys):
    out1 = tmp_path / "inline"
    rc = invoke("run", "--config", str(tiny_config_file), "--out", str(out1),
                "--policy", "rl")
    assert rc == 0
    assert (out1 / "learning_curve.csv").exists()
    assert "training" in capsys.readouterr().out

    # train once, then run against the frozen table; eval outputs must match
    tdir = tmp_path / "trained"
    assert invoke("train", "--config", str(tiny_config_file), "--out", str(tdir)) == 0
    out2 = tmp_path / "reuse"
    rc = invoke("run", "--config", str(tiny_config_file), "--out", str(out2),
                "--policy", "rl", "--qtable", str(tdir / "qtable.txt"))
    assert rc == 0
    assert read(out1 / "tasks_rl_3.csv") == read(out2 / "tasks_rl_3.csv")
    assert read(out1 / "summary.json") == read(out2 / "summary.json")


def test_train_outputs_and_reproducibility(tiny_config_file, tmp_path):
    d1, d2 = tmp_path / "t1", tmp_path / "t2"
    for d in (d1, d2):
        assert invoke("train", "--config", str(tiny_config_file), "--out", str(d)) == 0
    assert read(d1 / "qtable.txt") == read(d2 / "qtable.txt")
    curve = (d1 / "learning_curve.csv").read_text().splitlines()
    assert curve[0] == LEARNING_CURVE_HEADER
    assert len(curve) > 1


def test_train_qtable_flag_sets_destination(tiny_config_file, tmp_path):
    dest = tmp_path / "custom" / "table.txt"
    dest.parent.mkdir()
    rc = invoke("train", "--config", str(tiny_config_file),
                "--out", str(tmp_path / "o"), "--qtable", str(dest))
    assert rc == 0
    assert dest.exists()


def test_train_zero_tasks_warns(tmp_path, capsys):
    cfg = tmp_path / "zero.cfg"
    cfg.write_text((
        "config_version: 1\n"
        "cluster: [{speed: 1.0}]\n"
        "workload:\n"
        "  arrivals: {kind: steady, rate: 1.0}\n"
        "  sizes: {kind: exponential, mean: 1.0}\n"
        "policies: [rl]\n"
        "training_tasks: 0\n"
        "evaluation_horizon: 10.0\n"
        "seeds: [1]\n"
    ))
    rc = invoke("train", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert rc == 0
    assert "training_tasks is 0" in capsys.readouterr().err
    header = (tmp_path / "o" / "qtable.txt").read_text().splitlines()[0]
    assert header.startswith("rl-balance-qtable")


def test_compare_covers_every_policy_and_seed(tiny_config_file, tmp_path, capsys):
    out = tmp_path / "cmp"
    rc = invoke("compare", "--config", str(tiny_config_file), "--out", str(out))
    assert rc == 0
    payload = json.loads(read(out / "summary.json"))
    combos = {(row["policy_name"], row["seed"]) for row in payload}
    assert combos == {(p, s) for p in ("round_robin", "least_connections", "weighted", "rl")
                      for s in (3, 4)}
    # per-run artifacts exist for each cell
    for p, s in combos:
        assert (out / f"tasks_{p}_{s}.csv").exists()
    stdout = capsys.readouterr().out
    assert "median" in stdout or "mean_rt" in stdout


def test_compare_requires_two_policies(tmp_path, capsys):
    cfg = tmp_path / "single.cfg"
    cfg.write_text((
        "config_version: 1\n"
        "cluster: [{speed: 1.0}]\n"
        "workload:\n"
        "  arrivals: {kind: steady, rate: 0.5}\n"
        "  sizes: {kind: exponential, mean: 1.0}\n"
        "policies: [round_robin]\n"
        "evaluation_horizon: 50.0\n"
        "seeds: [1]\n"
    ))
    rc = invoke("compare", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert rc == 2
    assert "two policies" in capsys.readouterr().err


def test_sweep_writes_grid_rows(tiny_config_file, tmp_path):
    out = tmp_path / "sw"
    rc = invoke("sweep", "--config", str(tiny_config_file), "--out", str(out))
    assert rc == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == SWEEP_HEADER
    # 2 multipliers x 4 policies x 2 seeds
    assert len(lines) - 1 == 2 * 4 * 2
    multipliers = {line.split(",")[0] for line in lines[1:]}
    assert multipliers == {"0.5", "1"}
    # sweep.csv is the only artifact; per-cell CSVs stay out of the way
    assert os.listdir(out) == ["sweep.csv"]


def test_sweep_without_multipliers_exits_2(tmp_path, capsys):
    cfg = tmp_path / "nom.cfg"
    cfg.write_text((
        "config_version: 1\n"
        "cluster: [{speed: 1.0}]\n"
        "workload:\n"
        "  arrivals: {kind: steady, rate: 0.5}\n"
        "  sizes: {kind: exponential, mean: 1.0}\n"
        "policies: [round_robin, weighted]\n"
        "evaluation_horizon: 50.0\n"
        "seeds: [1]\n"
    ))
    rc = invoke("sweep", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert rc == 2
    assert "load_multipliers" in capsys.readouterr().err


def test_sweep_is_byte_deterministic(tiny_config_file, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert invoke("sweep", "--config", str(tiny_config_file), "--out", str(out)) == 0
    assert read(a / "sweep.csv") == read(b / "sweep.csv")


def test_thread_cap_parses_environment(monkeypatch):
    monkeypatch.delenv("RL_BALANCE_THREADS", raising=False)
    assert thread_cap() == 1
    monkeypatch.setenv("RL_BALANCE_THREADS", "4")
    assert thread_cap() == 4
    monkeypatch.setenv("RL_BALANCE_THREADS", "four")
    with pytest.raises(ConfigError, match="RL_BALANCE_THREADS"):
        thread_cap()


def test_parallel_results_match_serial(tiny_config_file, tmp_path, monkeypatch):
    serial, parallel = tmp_path / "s", tmp_path / "p"
    monkeypatch.delenv("RL_BALANCE_THREADS", raising=False)
    assert invoke("compare", "--config", str(tiny_config_file), "--out", str(serial)) == 0
    monkeypatch.setenv("RL_BALANCE_THREADS", "2")
    assert invoke("compare", "--config", str(tiny_config_file), "--out", str(parallel)) == 0
    assert read(serial / "summary.json") == read(parallel / "summary.json")


def test_console_entry_point_smoke(tiny_config_file, tmp_path):
    # exercise the installed module exactly as a shell user would
    proc = subprocess.run(
        [sys.executable, "-m", "rl_balance.cli", "run",
         "--config", str(tiny_config_file), "--out", str(tmp_path / "o"),
         "--policy", "least_connections"],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "mean_rt" in proc.stdout

    proc = subprocess.run([sys.executable, "-m", "rl_balance.cli"],
                          capture_output=True, text=True)
    assert proc.returncode == 2  # argparse usage error for a missing command
