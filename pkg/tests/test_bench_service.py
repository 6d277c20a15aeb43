import numpy as np
import pytest
from pydantic import ValidationError

from errors import MissingGroupError, NumericError, UsageError
from services.bench_service import RunRecord, convergence_bands, run_experiment, run_single, summarize
from solvers.types import SolveResult, Trajectory


def record(final, solver="mme", task="pointmass", seed=0, trace=None, status="ok"):
    return RunRecord(task=task, solver=solver, seed=seed, final_cost=final,
                     trace=trace if trace is not None else ([] if final is None else [final]),
                     wall_time_s=0.1, modes=4, alpha=0.5, resample_every=8, status=status)


def fake_result(task, costs):
    traj = Trajectory(states=np.zeros((task.horizon + 1, task.dynamics.state_dim)),
                      controls=np.zeros((task.horizon, task.dynamics.control_dim)), cost=costs[-1])
    return SolveResult(best=traj, costs=costs)


class TestSummarize:

    def test_mean_and_population_std(self):
        stats = summarize([record(1.0, seed=0), record(2.0, seed=1), record(3.0, seed=2)])
        assert len(stats) == 1
        assert stats[0].mean == pytest.approx(2.0)
        assert stats[0].std == pytest.approx(0.8165, abs=1e-4)
        assert (stats[0].min, stats[0].max, stats[0].runs) == (1.0, 3.0, 3)

    def test_equal_finals_have_zero_std(self):
        stats = summarize([record(5.0, solver="vanilla", seed=s) for s in range(16)])
        assert stats[0].std == 0.0

    def test_reduction_against_baselines(self):
        records = [record(32.245, solver="vanilla"), record(10.764, solver="me"), record(1.756, solver="mme")]
        by_solver = {s.solver: s for s in summarize(records)}
        assert by_solver["mme"].delta_vs_vanilla == pytest.approx(94.55, abs=0.01)
        assert by_solver["me"].delta_vs_vanilla == pytest.approx(66.62, abs=0.01)
        assert by_solver["mme"].delta_vs_me == pytest.approx(83.69, abs=0.01)
        assert by_solver["vanilla"].delta_vs_vanilla is None
        assert by_solver["me"].delta_vs_me is None

    def test_zero_baseline_has_no_reduction(self):
        by_solver = {s.solver: s for s in summarize([record(0.0, solver="vanilla"), record(0.0, solver="me"),
                                                     record(0.0, solver="mme")])}
        assert by_solver["mme"].delta_vs_vanilla is None
        assert by_solver["mme"].delta_vs_me is None
        assert by_solver["me"].delta_vs_vanilla is None

    def test_ordering_is_vanilla_me_mme(self):
        records = [record(1.0, solver="mme"), record(2.0, solver="vanilla"), record(1.5, solver="me")]
        assert [s.solver for s in summarize(records)] == ["vanilla", "me", "mme"]

    def test_failed_runs_are_excluded(self):
        stats = summarize([record(2.0), record(None, seed=1, status="failed")])
        assert stats[0].runs == 1

    def test_group_without_successful_runs(self):
        with pytest.raises(MissingGroupError):
            summarize([record(1.0), record(None, solver="me", status="failed")])

    def test_empty(self):
        assert summarize([]) == []


class TestRunRecord:

    def test_increasing_trace_is_rejected(self):
        with pytest.raises(ValidationError):
            record(2.0, trace=[3.0, 2.0, 2.5])

    def test_flat_trace_is_fine(self):
        assert record(2.0, trace=[3.0, 2.0, 2.0]).trace == [3.0, 2.0, 2.0]


class TestConvergenceBands:

    def test_bands_with_padding(self):
        records = [record(1.0, seed=0, trace=[4.0, 2.0, 1.0]), record(2.0, seed=1, trace=[4.0, 2.0])]
        rows = convergence_bands(records)
        assert [r.iter for r in rows] == [0, 1, 2]
        last = rows[-1]
        assert last.mean == pytest.approx(1.5)
        assert last.std == pytest.approx(0.5)
        assert (last.lower, last.upper) == (pytest.approx(0.5), pytest.approx(2.5))
        assert (last.min, last.max) == (1.0, 2.0)
        assert rows[0].std == 0.0


class TestRunExperiment:

    @pytest.mark.asyncio
    async def test_vanilla_repeats_one_solve(self, tasks_dir, mocker):
        solve = mocker.Mock(side_effect=lambda task: fake_result(task, [9.0, 4.0, 3.0]))
        mocker.patch.dict("services.bench_service.SOLVERS", {"vanilla": solve})
        records = await run_experiment("pointmass", "vanilla", [0, 1, 2], tasks_dir)
        assert solve.call_count == 1
        assert [r.seed for r in records] == [0, 1, 2]
        assert {r.final_cost for r in records} == {3.0}
        assert records[0].modes == 1

    @pytest.mark.asyncio
    async def test_empty_seed_list(self, tasks_dir):
        assert await run_experiment("pointmass", "mme", [], tasks_dir) == []

    @pytest.mark.asyncio
    async def test_failures_are_recorded_per_seed(self, tasks_dir, mocker):
        def solve(task):
            if task.solver.seed == 1:
                raise NumericError("blew up", timestep=3)
            return fake_result(task, [5.0, 2.0])

        mocker.patch.dict("services.bench_service.SOLVERS", {"me": solve})
        records = await run_experiment("pointmass", "me", [0, 1, 2], tasks_dir, workers=2)
        assert [r.status for r in records] == ["ok", "failed", "ok"]
        assert records[1].final_cost is None
        assert "blew up" in records[1].error

    @pytest.mark.asyncio
    async def test_overrides_reach_the_solver(self, tasks_dir, mocker):
        seen = []

        def solve(task):
            seen.append((task.solver.alpha, task.solver.modes, task.solver.seed))
            return fake_result(task, [1.0])

        mocker.patch.dict("services.bench_service.SOLVERS", {"mme": solve})
        records = await run_experiment("pointmass", "mme", [7], tasks_dir, overrides={"alpha": 2.0, "modes": 6})
        assert seen == [(2.0, 6, 7)]
        assert records[0].modes == 6
        assert records[0].alpha == 2.0

    @pytest.mark.asyncio
    async def test_unknown_solver(self, tasks_dir):
        with pytest.raises(UsageError):
            await run_experiment("pointmass", "cem", [0], tasks_dir)

    @pytest.mark.asyncio
    async def test_invalid_override_is_a_usage_error(self, tasks_dir):
        with pytest.raises(UsageError):
            await run_experiment("pointmass", "me", [0], tasks_dir, overrides={"alpha": -1.0})

    @pytest.mark.asyncio
    async def test_broken_runs_do_not_abort_the_batch(self, tasks_dir, mocker):
        def solve(task):
            if task.solver.seed == 0:
                return fake_result(task, [3.0, 2.0, 2.5])
            if task.solver.seed == 1:
                raise ValueError("bad shapes")
            return fake_result(task, [3.0, 1.0])

        mocker.patch.dict("services.bench_service.SOLVERS", {"mme": solve})
        records = await run_experiment("pointmass", "mme", [0, 1, 2], tasks_dir)
        assert [r.status for r in records] == ["failed", "failed", "ok"]
        assert records[0].error.startswith("invalid record")
        assert records[0].trace == []
        assert records[1].error == "ValueError: bad shapes"
        assert records[2].final_cost == 1.0

    @pytest.mark.asyncio
    async def test_real_mme_traces_never_increase(self, tasks_dir):
        records = await run_experiment("pointmass", "mme", [0, 1], tasks_dir,
                                       overrides={"iterations": 10}, workers=2, keep_states=True)
        assert len(records) == 2
        for r in records:
            assert r.status == "ok"
            assert all(b <= a for a, b in zip(r.trace, r.trace[1:]))
            assert len(r.states) == 51


class TestRunSingle:

    def test_increasing_trace_becomes_a_failed_record(self, pointmass_task, mocker):
        mocker.patch.dict("services.bench_service.SOLVERS", {"me": lambda task: fake_result(task, [3.0, 2.0, 2.5])})
        result = run_single(pointmass_task, "me", 4)
        assert result.status == "failed"
        assert result.final_cost is None
        assert result.seed == 4

    def test_real_vanilla_run(self, pointmass_task):
        result = run_single(pointmass_task.with_solver(iterations=10), "vanilla", 0)
        assert result.status == "ok"
        assert result.final_cost == result.trace[-1] < result.trace[0]
