import numpy as np
import pytest

from config import BASE_DIR
from systems.costs import CostModel
from systems.models import LinearSystem
from systems.task import SolverConfig, TaskDefinition, load_task

TASKS_DIR = BASE_DIR / "tasks"


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow benchmark tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def make_lqr_task(a, b, q, r, qf, horizon, x0, dt=1.0, **solver) -> TaskDefinition:
    """Linear dynamics with quadratic cost around the origin."""
    a, b = np.atleast_2d(np.asarray(a, dtype=float)), np.atleast_2d(np.asarray(b, dtype=float))
    n = a.shape[0]
    cost = CostModel(
        goal=np.zeros(n),
        state_weight=np.atleast_2d(np.asarray(q, dtype=float)),
        control_weight=np.atleast_2d(np.asarray(r, dtype=float)),
        terminal_weight=np.atleast_2d(np.asarray(qf, dtype=float)),
    )
    return TaskDefinition(
        name="lqr", dynamics_id="linear", dynamics=LinearSystem(dt=dt, a=a, b=b), cost=cost,
        horizon=horizon, x0=np.asarray(x0, dtype=float), goal=np.zeros(n), solver=SolverConfig(**solver),
    )


def random_spd(rng: np.random.Generator, n: int, floor: float = 0.1) -> np.ndarray:
    m = rng.standard_normal((n, n))
    return m @ m.T / n + floor * np.eye(n)


def random_lqr_task(rng: np.random.Generator, n_x: int, n_u: int, horizon: int, **solver) -> TaskDefinition:
    a = np.eye(n_x) + 0.1 * rng.standard_normal((n_x, n_x))
    b = rng.standard_normal((n_x, n_u))
    return make_lqr_task(a, b, random_spd(rng, n_x), random_spd(rng, n_u), random_spd(rng, n_x),
                         horizon, rng.standard_normal(n_x), **solver)


@pytest.fixture
def scalar_lqr_task() -> TaskDefinition:
    """x' = x + u with l = x^2/2 + u^2/2, Phi = x^2/2, one step from x0 = 1."""
    return make_lqr_task([[1.0]], [[1.0]], [[1.0]], [[1.0]], [[1.0]], horizon=1, x0=[1.0])


@pytest.fixture
def lqr_builder():
    return random_lqr_task


@pytest.fixture
def tasks_dir():
    return TASKS_DIR


@pytest.fixture
def pointmass_task() -> TaskDefinition:
    return load_task("pointmass", TASKS_DIR)
