import json

import numpy as np
import pytest

import banditgames.klearning as klearning
from banditgames.cli import main
from banditgames.harness import read_csv


def run_cli(*argv):
    return main(list(argv))


class TestArgumentHandling:
    def test_help_exits_cleanly(self, capsys):
        assert run_cli("--help") == 0
        assert "rps-selfplay" in capsys.readouterr().out

    def test_missing_subcommand(self, capsys):
        assert run_cli() == 2

    def test_unknown_flag(self, capsys):
        assert run_cli("rps-selfplay", "--agent", "ucb", "--bogus") == 2

    def test_missing_agent(self, capsys):
        assert run_cli("rps-selfplay") == 2

    def test_unknown_agent_lists_options(self, capsys):
        code = run_cli("rps-selfplay", "--agent", "sarsa", "--seeds", "1", "--horizon", "2")
        assert code == 2
        err = capsys.readouterr().err
        assert "sarsa" in err and "ucb" in err and "klearn" in err

    def test_unknown_opponent_lists_options(self, capsys):
        code = run_cli(
            "custom", "--agent", "ucb", "--opponent", "oracle", "--seeds", "1", "--horizon", "2"
        )
        assert code == 2
        err = capsys.readouterr().err
        assert "oracle" in err and "nash" in err and "nature" in err

    def test_h2h_requires_second_agent(self, capsys):
        assert run_cli("rps-h2h", "--agent", "ucb") == 2

    def test_fixed_opponent_needs_strategy(self, capsys):
        code = run_cli("custom", "--agent", "ucb", "--opponent", "fixed", "--seeds", "1", "--horizon", "2")
        assert code == 2
        assert "--strategy" in capsys.readouterr().err


class TestExperimentRuns:
    def test_counterexample_artifacts(self, tmp_path, capsys):
        code = run_cli(
            "counterexample",
            "--agent", "klearn",
            "--horizon", "20",
            "--seeds", "3",
            "--out", str(tmp_path),
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "mean final" in out and "counterexample" in out

        csv_path = tmp_path / "counterexample_klearn.csv"
        json_path = tmp_path / "counterexample_klearn.json"
        assert csv_path.exists() and json_path.exists()

        runs = read_csv(csv_path)
        assert sorted(runs) == [0, 1, 2]
        assert all(len(records) == 20 for records in runs.values())

        summary = json.loads(json_path.read_text())
        assert summary["config"]["horizon"] == 20
        assert summary["config"]["seeds"] == [0, 1, 2]
        assert summary["config"]["column_agent"]["name"] == "klearn"

    def test_seed_base_shifts_seed_list(self, tmp_path):
        code = run_cli(
            "rps-selfplay",
            "--agent", "naive-ucb",
            "--horizon", "5",
            "--seeds", "2",
            "--seed-base", "40",
            "--out", str(tmp_path),
        )
        assert code == 0
        summary = json.loads((tmp_path / "rps-selfplay_naive-ucb.json").read_text())
        assert summary["config"]["seeds"] == [40, 41]
        assert sorted(read_csv(tmp_path / "rps-selfplay_naive-ucb.csv")) == [40, 41]

    def test_csv_round_trip_is_field_identical(self, tmp_path):
        run_cli(
            "rps-br",
            "--agent", "ts",
            "--horizon", "15",
            "--seeds", "2",
            "--out", str(tmp_path),
        )
        path = tmp_path / "rps-br_ts.csv"
        first = path.read_text()
        runs = read_csv(path)
        from banditgames.harness import write_csv

        path2 = tmp_path / "copy.csv"
        write_csv(path2, runs)
        assert path2.read_text() == first

    def test_prior_override_lands_in_config(self, tmp_path):
        code = run_cli(
            "robust-bandit",
            "--agent", "ucb",
            "--horizon", "5",
            "--seeds", "1",
            "--prior-mean", "0.25",
            "--prior-var", "3.5",
            "--out", str(tmp_path),
        )
        assert code == 0
        summary = json.loads((tmp_path / "robust-bandit_ucb_vs_nature.json").read_text())
        params = summary["config"]["column_agent"]["params"]
        assert params["prior_mean"] == 0.25 and params["prior_var"] == 3.5

    def test_custom_fixed_opponent(self, tmp_path):
        code = run_cli(
            "custom",
            "--agent", "exp3",
            "--opponent", "fixed",
            "--strategy", "0.5,0.5",
            "--m", "2",
            "--k", "3",
            "--horizon", "10",
            "--seeds", "2",
            "--out", str(tmp_path),
        )
        assert code == 0
        runs = read_csv(tmp_path / "custom_exp3_vs_fixed.csv")
        rec = runs[0][0]
        assert rec.y_t.tolist() == [0.5, 0.5]
        assert len(rec.x_t) == 3

    def test_runtime_failure_exits_one(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setattr(klearning, "MAX_SWEEPS", 0)
        code = run_cli(
            "counterexample",
            "--agent", "klearn",
            "--horizon", "3",
            "--seeds", "1",
            "--out", str(tmp_path),
        )
        assert code == 1
        assert "round 1" in capsys.readouterr().err


class TestValidate:
    def test_validate_passes(self, capsys):
        assert run_cli("validate") == 0
        out = capsys.readouterr().out
        assert out.count("pass") >= 3
        assert "all checks passed" in out
