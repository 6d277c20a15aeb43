"""Short runs of every solver on every shipped task."""
import pytest

from solvers.ddp import solve_vanilla
from solvers.me_ddp import solve_me
from solvers.mme_ddp import solve_mme
from systems.task import list_tasks, load_task
from tests.conftest import TASKS_DIR

ITERATIONS = 16
SOLVERS = {"vanilla": solve_vanilla, "me": solve_me, "mme": solve_mme}


@pytest.mark.parametrize("solver", list(SOLVERS))
@pytest.mark.parametrize("task_name", list_tasks(TASKS_DIR))
class TestShippedTasks:

    def test_keeps_improving_after_the_first_iteration(self, tasks_dir, task_name, solver):
        task = load_task(task_name, tasks_dir).with_solver(iterations=ITERATIONS, seed=1)
        result = SOLVERS[solver](task)
        costs = result.costs
        assert len(costs) > 2
        assert all(b <= a for a, b in zip(costs, costs[1:]))
        assert costs[-1] < costs[1]
        assert result.best.cost == costs[-1]
        assert result.frozen_updates == 0
        if solver != "vanilla":
            assert len(costs) == ITERATIONS + 1
