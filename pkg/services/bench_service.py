"""Benchmark runs: solve a task for many seeds and reduce the results to statistics."""
from __future__ import annotations

import asyncio
import logging
import time
from collections import defaultdict
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator
from tqdm import tqdm

from errors import MissingGroupError, SolverError, UsageError
from solvers import SOLVERS
from systems.task import TaskDefinition, load_task

log = logging.getLogger(__name__)

SolverId = Literal["vanilla", "me", "mme"]
SOLVER_IDS: tuple[str, ...] = ("vanilla", "me", "mme")


def trace_violations(trace: list[float]) -> list[int]:
    """Iterations at which a min-cost trace increased."""
    return [i for i in range(1, len(trace)) if trace[i] > trace[i - 1]]


class RunRecord(BaseModel):
    """One solver run on one task and seed."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    task: str
    solver: SolverId
    seed: int
    final_cost: float | None
    trace: list[float]
    wall_time_s: float
    modes: int
    alpha: float
    resample_every: int
    status: Literal["ok", "failed"] = "ok"
    error: str | None = None
    states: list[list[float]] | None = None

    @field_validator("trace")
    @classmethod
    def _non_increasing(cls, trace: list[float]) -> list[float]:
        bad = trace_violations(trace)
        if bad:
            raise ValueError(f"min-cost trace increases at iterations {bad}")
        return trace


class SummaryStats(BaseModel):
    """Final-cost statistics of one (task, solver) group; std is the population std."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    task: str
    solver: SolverId
    runs: int
    mean: float
    std: float
    min: float
    max: float
    delta_vs_vanilla: float | None = None
    delta_vs_me: float | None = None


class ConvergenceRow(BaseModel):
    """Spread of the min-cost traces over seeds at one iteration."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    task: str
    solver: SolverId
    iter: int
    mean: float
    std: float
    lower: float
    upper: float
    min: float
    max: float


def _mode_count(solver_id: str, task: TaskDefinition) -> int:
    return {"vanilla": 1, "me": 2}.get(solver_id, task.solver.modes)


def run_single(task: TaskDefinition, solver_id: str, seed: int, keep_states: bool = False) -> RunRecord:
    """Solve one seed. Any failure, including a record that breaks the trace contract, is recorded instead of raised."""
    seeded = task.with_solver(seed=seed)
    common = dict(task=task.name, solver=solver_id, seed=seed, modes=_mode_count(solver_id, task),
                  alpha=task.solver.alpha, resample_every=task.solver.resample_every)
    start = time.perf_counter()
    try:
        result = SOLVERS[solver_id](seeded)
        states = result.best.states.tolist() if keep_states else None
        return RunRecord(final_cost=result.best.cost, trace=[float(c) for c in result.costs],
                         wall_time_s=time.perf_counter() - start, states=states, **common)
    except SolverError as e:
        log.warning("%s on %s failed for seed %s: %s", solver_id, task.name, seed, e)
        error = str(e)
    except ValidationError as e:
        log.error("%s on %s produced an invalid record for seed %s: %s", solver_id, task.name, seed, e)
        error = f"invalid record: {e.errors()[0]['msg']}"
    except Exception as e:
        log.error("%s on %s crashed for seed %s: %s", solver_id, task.name, seed, e, exc_info=True)
        error = f"{type(e).__name__}: {e}"
    return RunRecord(final_cost=None, trace=[], wall_time_s=time.perf_counter() - start,
                     status="failed", error=error, **common)


async def run_experiment(config_path: str | Path, solver_id: str, seeds: list[int], tasks_dir: Path,
                         overrides: dict[str, Any] | None = None, workers: int = 1,
                         progress: bool = False, keep_states: bool = False) -> list[RunRecord]:
    """Run a solver on a task for every seed and return the records ordered by seed.

    Vanilla DDP ignores the seed, so it is solved once and the record is
    repeated per requested seed.

    Raises:
        TaskNotFoundError, TaskConfigError: If the task cannot be loaded.
        UsageError: If solver_id is unknown or an override is invalid.
    """
    if solver_id not in SOLVERS:
        raise UsageError(f"Unknown solver '{solver_id}', expected one of {', '.join(SOLVER_IDS)}")
    task = load_task(config_path, tasks_dir)
    if overrides:
        try:
            task = task.with_solver(**overrides)
        except ValidationError as e:
            raise UsageError(f"Invalid solver override: {e.errors()[0]['msg']}") from e
    if not seeds:
        return []
    log.info("Running %s on %s for %s seeds (%s workers).", solver_id, task.name, len(seeds), workers)

    if solver_id == "vanilla":
        record = await asyncio.to_thread(run_single, task, solver_id, seeds[0], keep_states)
        return [record.model_copy(update={"seed": seed}) for seed in seeds]

    semaphore = asyncio.Semaphore(workers)
    bar = tqdm(total=len(seeds), desc=f"{task.name}/{solver_id}", disable=not progress)

    async def run_seed(seed: int) -> RunRecord:
        async with semaphore:
            record = await asyncio.to_thread(run_single, task, solver_id, seed, keep_states)
        bar.update(1)
        log.debug("Seed %s finished with cost %s", seed, record.final_cost)
        return record

    try:
        records = await asyncio.gather(*(run_seed(seed) for seed in seeds))
    finally:
        bar.close()
    return sorted(records, key=lambda r: r.seed)


def _delta(baseline: float, value: float) -> float | None:
    """Percent reduction of value against baseline; undefined for a zero baseline."""
    if baseline == 0.0:
        return None
    return 100.0 * (baseline - value) / baseline


def summarize(records: list[RunRecord]) -> list[SummaryStats]:
    """Mean, population std, min and max of final costs per (task, solver), with reductions vs baselines.

    Raises:
        MissingGroupError: If a (task, solver) group has no successful run.
    """
    finals: dict[tuple[str, str], list[float]] = defaultdict(list)
    for record in records:
        finals.setdefault((record.task, record.solver), [])
        if record.status == "ok" and record.final_cost is not None:
            finals[(record.task, record.solver)].append(record.final_cost)

    for key, values in finals.items():
        if not values:
            raise MissingGroupError(f"No successful runs for task '{key[0]}' with solver '{key[1]}'")

    means = {key: float(np.mean(values)) for key, values in finals.items()}
    order = {s: i for i, s in enumerate(SOLVER_IDS)}
    stats = []
    for (task, solver) in sorted(finals, key=lambda k: (k[0], order[k[1]])):
        values = np.asarray(finals[(task, solver)])
        mean = means[(task, solver)]
        vanilla = means.get((task, "vanilla"))
        me = means.get((task, "me"))
        stats.append(SummaryStats(
            task=task, solver=solver, runs=len(values), mean=mean, std=float(np.std(values)),
            min=float(values.min()), max=float(values.max()),
            delta_vs_vanilla=_delta(vanilla, mean) if vanilla is not None and solver != "vanilla" else None,
            delta_vs_me=_delta(me, mean) if me is not None and solver not in ("vanilla", "me") else None,
        ))
    return stats


def convergence_bands(records: list[RunRecord]) -> list[ConvergenceRow]:
    """Per-iteration mean, 2-sigma band, min and max of the traces of each (task, solver) group.

    Shorter traces are held at their final value.
    """
    traces: dict[tuple[str, str], list[list[float]]] = defaultdict(list)
    for record in records:
        if record.status == "ok" and record.trace:
            traces[(record.task, record.solver)].append(record.trace)

    rows = []
    for (task, solver), group in sorted(traces.items()):
        length = max(len(t) for t in group)
        padded = np.array([t + [t[-1]] * (length - len(t)) for t in group])
        mean = padded.mean(axis=0)
        std = padded.std(axis=0)
        for i in range(length):
            rows.append(ConvergenceRow(
                task=task, solver=solver, iter=i, mean=float(mean[i]), std=float(std[i]),
                lower=float(mean[i] - 2 * std[i]), upper=float(mean[i] + 2 * std[i]),
                min=float(padded[:, i].min()), max=float(padded[:, i].max()),
            ))
    return rows
