"""Task definitions: YAML schema, validation and construction of models.

A task file is YAML with nested sections::

    name: pointmass
    horizon: 60
    x0: [0, 0, 0, 0]
    goal: [4, 0, 0, 0]
    dynamics: {id: pointmass, dt: 0.1}
    cost:
      state_weights: [0, 0, 0, 0]          # diagonal of Q
      control_weights: [0.1, 0.1]          # diagonal of R
      terminal_weights: [100, 100, 10, 10] # diagonal of Qf
      obstacles:
        - {center: [2, 0], radius: 0.5, weight: 5}
    solver: {alpha: 0.5, modes: 4, resample_every: 8, iterations: 100, seed: 0}

Errors in either the YAML syntax or the schema are reported with the line
number of the offending entry.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any, Literal

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError, model_validator

from errors import TaskConfigError, TaskNotFoundError, TrajectoryShapeError
from systems.costs import ArmPoints, CostModel, Obstacle, PointMap, StateSlice
from systems.dynamics import DynamicsModel
from systems.models import Car, LinearSystem, Manipulator, PointMass, Quadcopter

if TYPE_CHECKING:
    from solvers.types import Trajectory

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class SolverConfig(BaseModel):
    """Solver settings shared by vanilla, ME and MME runs."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: PositiveFloat = 1.0
    modes: int = Field(4, ge=1)
    resample_every: int = Field(8, ge=1)
    iterations: int = Field(100, ge=1)
    seed: int = 0
    line_search_steps: int = Field(11, ge=1)
    tolerance: float = Field(1e-9, ge=0.0)
    patience: int = Field(5, ge=1)
    mu_init: float = Field(0.0, ge=0.0)
    mu_min: PositiveFloat = 1e-6
    mu_max: PositiveFloat = 1e6
    mu_factor: float = Field(10.0, gt=1.0)
    convexify: bool = True
    explorer_retries: int = Field(5, ge=1)
    parallel_modes: bool = False

    @model_validator(mode="after")
    def _check_mu_range(self):
        if self.mu_min > self.mu_max:
            raise ValueError("mu_min must not exceed mu_max")
        return self

    def with_overrides(self, **overrides: Any) -> "SolverConfig":
        """Validated copy with the non-None overrides applied."""
        values = self.model_dump()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return SolverConfig.model_validate(values)

    @property
    def step_sizes(self) -> tuple[float, ...]:
        return tuple(2.0 ** -i for i in range(self.line_search_steps))


class ObstacleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    center: list[float] = Field(min_length=2, max_length=3)
    radius: PositiveFloat
    weight: float = Field(1.0, ge=0.0)


class CostSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    state_weights: list[float]
    control_weights: list[float]
    terminal_weights: list[float]
    obstacles: list[ObstacleSpec] = []
    ee_goal: list[float] | None = Field(None, min_length=3, max_length=3)
    ee_weight: float = Field(0.0, ge=0.0)


class DynamicsSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: Literal["pointmass", "car", "quadcopter", "manipulator", "linear"]
    dt: PositiveFloat
    params: dict[str, Any] = {}


class TaskSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION
    name: str
    description: str = ""
    horizon: int = Field(ge=1)
    x0: list[float]
    goal: list[float]
    dynamics: DynamicsSpec
    cost: CostSpec
    solver: SolverConfig = SolverConfig()


@dataclass(frozen=True, eq=False)
class TaskDefinition:
    """A fully built task: dynamics, cost, horizon, initial state and solver config."""

    name: str
    dynamics_id: str
    dynamics: DynamicsModel
    cost: CostModel
    horizon: int
    x0: np.ndarray
    goal: np.ndarray
    solver: SolverConfig

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"Horizon must be at least 1, got {self.horizon}")

    def with_solver(self, **overrides: Any) -> "TaskDefinition":
        return TaskDefinition(
            name=self.name, dynamics_id=self.dynamics_id, dynamics=self.dynamics, cost=self.cost,
            horizon=self.horizon, x0=self.x0, goal=self.goal, solver=self.solver.with_overrides(**overrides),
        )


def _build_dynamics(spec: DynamicsSpec) -> DynamicsModel:
    params = dict(spec.params)
    if spec.id == "pointmass":
        return PointMass(dt=spec.dt, **params)
    if spec.id == "car":
        return Car(dt=spec.dt, **params)
    if spec.id == "quadcopter":
        if "inertia" in params:
            params["inertia"] = tuple(params["inertia"])
        return Quadcopter(dt=spec.dt, **params)
    if spec.id == "manipulator":
        if "inertia" in params:
            params["inertia"] = tuple(params["inertia"])
        return Manipulator(dt=spec.dt, **params)
    return LinearSystem(dt=spec.dt, a=np.asarray(params["a"], dtype=float), b=np.asarray(params["b"], dtype=float))


def _build_point_map(dynamics_id: str, state_dim: int) -> PointMap | None:
    if dynamics_id in ("pointmass", "car"):
        return StateSlice(indices=(0, 1), state_dim=state_dim)
    if dynamics_id == "quadcopter":
        return StateSlice(indices=(0, 1, 2), state_dim=state_dim)
    if dynamics_id == "manipulator":
        return ArmPoints(state_dim=state_dim)
    return None


def _node_line(node: yaml.Node | None, loc: tuple) -> int | None:
    """1-based line of the YAML node addressed by a pydantic error location."""
    line = node.start_mark.line + 1 if node is not None else None
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            match = next((v for k, v in node.value if k.value == key), None)
            if match is None:
                break
            node = match
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            break
        line = node.start_mark.line + 1
    return line


def parse_task(text: str, source: str = "<task>") -> TaskDefinition:
    """Parse and validate task YAML text into a TaskDefinition.

    Raises:
        TaskConfigError: On YAML syntax errors, schema violations or dimension mismatches,
            with the line number of the offending entry.
    """
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise TaskConfigError(f"Invalid YAML: {getattr(e, 'problem', e)}",
                              line=mark.line + 1 if mark else None, path=source) from e
    if not isinstance(data, dict):
        raise TaskConfigError("Task config must be a mapping", line=1, path=source)

    try:
        spec = TaskSpec.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = tuple(first["loc"])
        field_name = ".".join(str(p) for p in loc) or "<root>"
        raise TaskConfigError(f"{field_name}: {first['msg']}", line=_node_line(root, loc), path=source) from e

    if spec.schema_version != SCHEMA_VERSION:
        raise TaskConfigError(f"Unsupported schema_version {spec.schema_version}",
                              line=_node_line(root, ("schema_version",)), path=source)

    try:
        dynamics = _build_dynamics(spec.dynamics)
    except (TypeError, KeyError, ValueError) as e:
        raise TaskConfigError(f"dynamics.params: {e}", line=_node_line(root, ("dynamics", "params")), path=source) from e

    n, m = dynamics.state_dim, dynamics.control_dim
    expected = {
        ("x0",): n, ("goal",): n,
        ("cost", "state_weights"): n, ("cost", "terminal_weights"): n, ("cost", "control_weights"): m,
    }
    values = {
        ("x0",): spec.x0, ("goal",): spec.goal,
        ("cost", "state_weights"): spec.cost.state_weights,
        ("cost", "terminal_weights"): spec.cost.terminal_weights,
        ("cost", "control_weights"): spec.cost.control_weights,
    }
    for loc, size in expected.items():
        if len(values[loc]) != size:
            raise TaskConfigError(f"{'.'.join(loc)}: expected {size} entries, got {len(values[loc])}",
                                  line=_node_line(root, loc), path=source)

    point_map = _build_point_map(spec.dynamics.id, n)
    if spec.cost.obstacles and point_map is None:
        raise TaskConfigError("cost.obstacles: this dynamics has no task-space points",
                              line=_node_line(root, ("cost", "obstacles")), path=source)
    if spec.cost.ee_goal is not None and spec.dynamics.id != "manipulator":
        raise TaskConfigError("cost.ee_goal is only supported for the manipulator",
                              line=_node_line(root, ("cost", "ee_goal")), path=source)

    cost = CostModel(
        goal=np.asarray(spec.goal, dtype=float),
        state_weight=np.diag(spec.cost.state_weights).astype(float),
        control_weight=np.diag(spec.cost.control_weights).astype(float),
        terminal_weight=np.diag(spec.cost.terminal_weights).astype(float),
        obstacles=tuple(Obstacle(np.asarray(o.center, dtype=float), o.radius, o.weight) for o in spec.cost.obstacles),
        point_map=point_map,
        ee_goal=None if spec.cost.ee_goal is None else np.asarray(spec.cost.ee_goal, dtype=float),
        ee_weight=spec.cost.ee_weight,
    )
    task = TaskDefinition(
        name=spec.name, dynamics_id=spec.dynamics.id, dynamics=dynamics, cost=cost, horizon=spec.horizon,
        x0=np.asarray(spec.x0, dtype=float), goal=np.asarray(spec.goal, dtype=float), solver=spec.solver,
    )
    log.debug("Parsed task %s from %s (n_x=%s, n_u=%s, T=%s).", task.name, source, n, m, task.horizon)
    return task


def list_tasks(tasks_dir: Path) -> list[str]:
    """Ids of the task configs shipped in tasks_dir."""
    return sorted(p.stem for p in Path(tasks_dir).glob("*.yaml"))


def load_task(task: str | Path, tasks_dir: Path) -> TaskDefinition:
    """Load a task by id (looked up in tasks_dir) or by path.

    Raises:
        TaskNotFoundError: If the task is neither a shipped id nor an existing file.
        TaskConfigError: If the file does not parse.
    """
    path = Path(task)
    if not path.is_file():
        path = Path(tasks_dir) / f"{task}.yaml"
    if not path.is_file():
        raise TaskNotFoundError(str(task), list_tasks(tasks_dir))
    log.info("Loading task config %s", path)
    return parse_task(path.read_text(encoding="utf-8"), source=str(path))


def cost_eval(task: TaskDefinition, traj: "Trajectory") -> float:
    """Total cost Phi(x_T) + sum_t l_t(x_t, u_t) of a trajectory."""
    return evaluate_cost(task, traj.states, traj.controls)


def evaluate_cost(task: TaskDefinition, states: np.ndarray, controls: np.ndarray) -> float:
    T = task.horizon
    if states.shape[0] != T + 1 or controls.shape[0] != T:
        raise TrajectoryShapeError(
            f"Trajectory has {states.shape[0]} states and {controls.shape[0]} controls; horizon {T} needs {T + 1} and {T}")
    total = task.cost.terminal(states[T])
    for t in range(T):
        total += task.cost.running(states[t], controls[t], t)
    return float(total)
