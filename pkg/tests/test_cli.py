import json

import numpy as np
import pytest

from errors import UsageError
from main import cli_main
from solvers.types import SolveResult, Trajectory
from utils.seeds import parse_seeds


def _fake_vanilla(task):
    traj = Trajectory(states=np.zeros((task.horizon + 1, task.dynamics.state_dim)),
                      controls=np.zeros((task.horizon, task.dynamics.control_dim)), cost=2.0)
    return SolveResult(best=traj, costs=[8.0, 3.0, 2.0])


class TestCli:

    def test_list_tasks(self, capsys):
        assert cli_main(["list-tasks"]) == 0
        assert capsys.readouterr().out.split() == ["car", "manipulator", "pointmass", "quadcopter"]

    def test_unknown_task_lists_available(self, capsys):
        assert cli_main(["run", "--task", "nosuch"]) == 2
        err = capsys.readouterr().err
        assert "nosuch" in err
        assert "pointmass" in err

    def test_unknown_flag_is_a_usage_error(self, capsys):
        assert cli_main(["run", "--task", "pointmass", "--bogus"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_missing_subcommand(self):
        assert cli_main([]) == 2

    def test_bad_seed_spec(self, capsys):
        assert cli_main(["run", "--task", "pointmass", "--seeds", "lots"]) == 2

    def test_bad_override(self):
        assert cli_main(["run", "--task", "pointmass", "--solver", "me", "--alpha", "-1"]) == 2

    def test_stray_value_error_is_a_runtime_failure(self, mocker):
        mocker.patch("handlers.run_commands.run_experiment", side_effect=ValueError("shapes (2,) and (3,)"))
        assert cli_main(["run", "--task", "pointmass", "--solver", "me", "--seeds", "1"]) == 1

    def test_usage_error_from_the_service(self, mocker):
        mocker.patch("handlers.run_commands.run_experiment", side_effect=UsageError("bad override"))
        assert cli_main(["run", "--task", "pointmass", "--solver", "me", "--seeds", "1"]) == 2

    def test_run_then_summarize(self, tmp_path, mocker, capsys):
        mocker.patch.dict("services.bench_service.SOLVERS", {"vanilla": _fake_vanilla})
        out = tmp_path / "results"
        code = cli_main(["run", "--task", "pointmass", "--solver", "vanilla", "--seeds", "3",
                         "--out", str(out), "--format", "json"])
        assert code == 0
        document = json.loads((out / "results.json").read_text())
        assert [r["seed"] for r in document["records"]] == [0, 1, 2]
        assert document["summary"][0]["std"] == 0.0
        capsys.readouterr()

        assert cli_main(["summarize", "--in", str(out), "--out", str(tmp_path / "again")]) == 0
        assert "pointmass" in capsys.readouterr().out
        assert (tmp_path / "again" / "summary.csv").exists()

    def test_summarize_missing_input(self, tmp_path):
        assert cli_main(["summarize", "--in", str(tmp_path / "missing")]) == 1


class TestParseSeeds:

    def test_default_is_sixteen(self):
        assert parse_seeds(None) == list(range(16))

    def test_count_list_and_range(self):
        assert parse_seeds("3") == [0, 1, 2]
        assert parse_seeds("0,3,7") == [0, 3, 7]
        assert parse_seeds("4-6") == [4, 5, 6]
        assert parse_seeds("0") == []

    @pytest.mark.parametrize("text", ["lots", "5-2", "-3"])
    def test_invalid(self, text):
        with pytest.raises(UsageError):
            parse_seeds(text)
