"""Slot engine shared by ME-DDP and MME-DDP.

A run keeps N slots, each a nominal trajectory with its local Gaussian
policy. Every ``resample_every`` iterations slot 0 receives the lowest-cost
slot unchanged and the remaining slots are re-drawn around a chosen
component; between resamples every slot runs an ordinary maximum-entropy DDP
iteration. Slot updates are independent and may run on a thread pool.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Callable, NamedTuple

import numpy as np
from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt

from errors import CovarianceNotPDError, DivergedRolloutError, NumericError
from solvers.ddp import adapt_mu, backward_pass, initial_trajectory, line_search, rollout
from solvers.types import LocalPolicy, SolveResult, Trajectory, ValueExpansion
from systems.task import TaskDefinition

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SlotState:
    """One mode: nominal trajectory, last policy, value expansion, entropy accumulator and LM shift.

    ``policy`` comes from the backward pass of the slot's last update, so the
    nominal already contains its accepted feedforward step. ``frozen`` marks a
    slot whose last backward pass failed.
    """

    trajectory: Trajectory
    policy: LocalPolicy | None = None
    value: ValueExpansion | None = None
    v_h: float = 0.0
    mu: float = 0.0
    frozen: bool = False

    @property
    def cost(self) -> float:
        return self.trajectory.cost


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Snapshot of all slots and mixture weights after an iteration."""

    slots: tuple[SlotState, ...]
    weights: np.ndarray
    iteration: int = 0

    @property
    def costs(self) -> np.ndarray:
        return np.array([s.cost for s in self.slots])

    @property
    def v_h(self) -> np.ndarray:
        return np.array([s.v_h for s in self.slots])

    def elite_index(self) -> int:
        """Index of the lowest-cost slot; ties go to the lowest index."""
        return int(np.argmin(self.costs))

    @property
    def min_cost(self) -> float:
        return float(np.min(self.costs))


class ModeRngs(NamedTuple):
    """Per-slot noise generators plus one generator for component draws."""

    category: np.random.Generator
    slots: tuple[np.random.Generator, ...]


def spawn_rngs(seed: int, n_slots: int) -> ModeRngs:
    children = np.random.SeedSequence(seed).spawn(n_slots + 1)
    return ModeRngs(category=np.random.default_rng(children[0]),
                    slots=tuple(np.random.default_rng(c) for c in children[1:]))


ComponentChooser = Callable[[ModeSet, np.random.Generator], int]
WeightFn = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


def sample_feedforward(policy: LocalPolicy, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw feedforward offsets eps_t ~ N(0, Sigma_t) for every timestep at once.

    Returns an array of shape (T, n_u), or (size, T, n_u) when size is given.
    Timesteps with an all-zero covariance get zero offsets.

    Raises:
        CovarianceNotPDError: If a non-zero Sigma_t has no Cholesky factor.
    """
    sigma = policy.sigma
    T, n_u = policy.k.shape
    chol = np.zeros_like(sigma)
    active = np.any(sigma != 0.0, axis=(1, 2))
    for t in np.flatnonzero(active):
        try:
            chol[t] = np.linalg.cholesky(sigma[t])
        except np.linalg.LinAlgError as e:
            raise CovarianceNotPDError("Policy covariance is not positive definite", timestep=int(t)) from e
    shape = (T, n_u) if size is None else (size, T, n_u)
    z = rng.standard_normal(shape)
    return np.einsum("tij,...tj->...ti", chol, z)


def draw_explorer(task: TaskDefinition, nominal: Trajectory, policy: LocalPolicy,
                  rng: np.random.Generator, eta: float = 1.0) -> Trajectory | None:
    """Rollout of the policy around nominal plus sampled feedforward noise, re-drawn on divergence.

    Returns None once every attempt diverged.
    """
    retrying = Retrying(
        stop=stop_after_attempt(task.solver.explorer_retries),
        retry=retry_if_exception_type(DivergedRolloutError),
        before_sleep=before_sleep_log(log, logging.DEBUG),
        reraise=True,
    )
    try:
        for attempt in retrying:
            with attempt:
                noise = sample_feedforward(policy, rng)
                explorer = rollout(task, nominal, policy, eta, noise)
    except DivergedRolloutError as e:
        log.warning("Explorer diverged %s times (%s); falling back to the elite.", task.solver.explorer_retries, e)
        return None
    return explorer


class SamplingPolicy(NamedTuple):
    policy: LocalPolicy
    eta: float


def component_policy(task: TaskDefinition, slot: SlotState) -> SamplingPolicy | None:
    """Gaussian policy explorers around a slot are drawn from.

    An updated slot samples N(u_bar + K dx, Sigma) with the gains and
    covariance of its last backward pass; its nominal already holds the
    accepted step u_bar_prev + eta k, so no feedforward is added again. A slot
    that was never updated gets a fresh maximum-entropy pass and the full step.
    """
    if slot.policy is not None:
        return SamplingPolicy(slot.policy, 0.0)
    try:
        return SamplingPolicy(backward_pass(slot.trajectory, task, task.solver.alpha, mu=slot.mu).policy, 1.0)
    except NumericError as e:
        log.warning("Could not build a sampling policy: %s", e)
        return None


def resample(task: TaskDefinition, modes: ModeSet, choose: ComponentChooser, rngs: ModeRngs) -> ModeSet:
    """Elite into slot 0, explorers drawn around chosen components into the other slots."""
    snapshot = modes.slots
    elite_index = modes.elite_index()
    elite = replace(snapshot[elite_index], frozen=False)
    slots = [elite]
    policies: dict[int, SamplingPolicy | None] = {}
    for n in range(1, len(snapshot)):
        component = choose(modes, rngs.category)
        if component not in policies:
            policies[component] = component_policy(task, snapshot[component])
        sampling = policies[component]
        explorer = None
        if sampling is not None:
            explorer = draw_explorer(task, snapshot[component].trajectory, sampling.policy, rngs.slots[n],
                                     sampling.eta)
        if explorer is None:
            slots.append(elite)
        else:
            slots.append(SlotState(trajectory=explorer, mu=task.solver.mu_init))
        log.debug("Resample slot %s from component %s (cost %.6g)", n, component, slots[-1].cost)
    return ModeSet(slots=tuple(slots), weights=modes.weights, iteration=modes.iteration)


def update_slot(task: TaskDefinition, slot: SlotState) -> SlotState:
    """One maximum-entropy DDP iteration; a slot whose backward pass fails is frozen."""
    try:
        result = backward_pass(slot.trajectory, task, task.solver.alpha, mu=slot.mu)
    except NumericError as e:
        log.warning("Freezing slot for this iteration: %s", e)
        return replace(slot, frozen=True)
    trajectory, accepted = line_search(task, slot.trajectory, result.policy)
    return SlotState(trajectory=trajectory, policy=result.policy, value=result.value, v_h=result.v_h,
                     mu=adapt_mu(result.mu, accepted, task.solver))


def uniform_weights(costs: np.ndarray, v_h: np.ndarray, alpha: float) -> np.ndarray:
    return np.full(costs.shape[0], 1.0 / costs.shape[0])


def run_modes(task: TaskDefinition, n_slots: int, choose: ComponentChooser,
              weigh: WeightFn = uniform_weights, label: str = "modes") -> SolveResult:
    """Run the slot engine for the task's iteration budget (no early stop)."""
    cfg = task.solver
    init = initial_trajectory(task)
    modes = ModeSet(slots=tuple(SlotState(trajectory=init, mu=cfg.mu_init) for _ in range(n_slots)),
                    weights=np.full(n_slots, 1.0 / n_slots))
    rngs = spawn_rngs(cfg.seed, n_slots)

    costs = [modes.min_cost]
    slot_costs = [[init.cost] for _ in range(n_slots)]
    weight_history = [modes.weights]
    frozen_updates = 0
    log.info("%s on %s: %s slots, alpha=%g, m=%s, seed=%s, initial cost %.6g",
             label, task.name, n_slots, cfg.alpha, cfg.resample_every, cfg.seed, init.cost)

    executor = ThreadPoolExecutor(max_workers=n_slots) if cfg.parallel_modes and n_slots > 1 else None
    worker = partial(update_slot, task)
    try:
        for k in range(1, cfg.iterations + 1):
            if k % cfg.resample_every == 0:
                modes = resample(task, modes, choose, rngs)
            updated = tuple(executor.map(worker, modes.slots)) if executor else tuple(map(worker, modes.slots))
            slot_cost = np.array([s.cost for s in updated])
            weights = weigh(slot_cost, np.array([s.v_h for s in updated]), cfg.alpha)
            modes = ModeSet(slots=updated, weights=weights, iteration=k)
            frozen_updates += sum(s.frozen for s in updated)

            costs.append(modes.min_cost)
            for n, c in enumerate(slot_cost):
                slot_costs[n].append(float(c))
            weight_history.append(weights)
            log.debug("Iteration %s: min cost %.10g, slot costs %s, weights %s",
                      k, modes.min_cost, np.array2string(slot_cost, precision=4),
                      np.array2string(weights, precision=3))
    finally:
        if executor is not None:
            executor.shutdown()

    if frozen_updates:
        log.warning("%s on %s: %s slot updates were skipped after a failed backward pass.",
                    label, task.name, frozen_updates)
    best = modes.slots[modes.elite_index()].trajectory
    log.info("%s on %s finished: best cost %.6g", label, task.name, best.cost)
    return SolveResult(best=best, costs=costs, slot_costs=slot_costs, weights=weight_history,
                       iterations=cfg.iterations, frozen_updates=frozen_updates)
