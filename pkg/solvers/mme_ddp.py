"""Multimodal maximum-entropy DDP.

N maximum-entropy DDP modes run side by side. Their desirabilities add, so
the composed value is a log-sum-exp of the per-mode values and the composed
policy is a Gaussian mixture whose weights are a softmax of -(J + V_H) / alpha.
Explorer slots pick a component from that categorical distribution and then
sample feedforward noise around it.
"""
from __future__ import annotations

import logging

import numpy as np
from scipy.special import logsumexp
from scipy.stats import multivariate_normal

from solvers.modes import ModeRngs, ModeSet, resample, run_modes
from solvers.types import SolveResult
from systems.task import TaskDefinition

log = logging.getLogger(__name__)


def compose_value(values: np.ndarray, alpha: float) -> float:
    """-alpha ln sum_n exp(-V_n / alpha), evaluated with max-subtraction."""
    values = np.asarray(values, dtype=float)
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if values.size < 1:
        raise ValueError("At least one component is required")
    return float(-alpha * logsumexp(-values / alpha))


def compose_terminal_value(terminal_values: np.ndarray, alpha: float) -> float:
    """Composed terminal cost from the per-mode terminal approximations evaluated at one state."""
    return compose_value(terminal_values, alpha)


def compute_weights(costs: np.ndarray, v_h: np.ndarray, alpha: float) -> np.ndarray:
    """Mixture weights w_n = softmax(-(J_n + V_H_n) / alpha)."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    logits = -(np.asarray(costs, dtype=float) + np.asarray(v_h, dtype=float)) / alpha
    weights = np.exp(logits - logsumexp(logits))
    return weights / weights.sum()


def draw_components(weights: np.ndarray, rng: np.random.Generator, size: int | None = None):
    """Categorical draw(s) of component indices."""
    return rng.choice(len(weights), size=size, p=weights)


def categorical_component(modes: ModeSet, rng: np.random.Generator) -> int:
    return int(draw_components(modes.weights, rng))


def resample_modes(task: TaskDefinition, modes: ModeSet, rngs: ModeRngs) -> ModeSet:
    """Elite into slot 0; slots 1..N-1 sampled from the Gaussian mixture policy."""
    return resample(task, modes, categorical_component, rngs)


def solve_mme(task: TaskDefinition, choose=categorical_component) -> SolveResult:
    """Multimodal maximum-entropy DDP with task.solver.modes components.

    ``choose`` selects the component each explorer is drawn around; the
    default is the categorical draw over the mixture weights.
    """
    return run_modes(task, task.solver.modes, choose, weigh=compute_weights, label="MME-DDP")


def mixture_log_density(u: np.ndarray, weights: np.ndarray, means: np.ndarray, covariances: np.ndarray) -> float:
    """Log-density of the Gaussian mixture policy sum_n w_n N(u; mean_n, cov_n)."""
    weights = np.asarray(weights, dtype=float)
    with np.errstate(divide="ignore"):
        log_w = np.log(weights)
    terms = np.array([
        multivariate_normal.logpdf(u, mean=means[n], cov=covariances[n]) for n in range(len(weights))
    ])
    return float(logsumexp(log_w + terms))


def composed_value_at(modes: ModeSet, x: np.ndarray, alpha: float) -> float:
    """Compose each mode's quadratic value model at a physical state x (t = 0)."""
    values = []
    for slot in modes.slots:
        if slot.value is None:
            continue
        dx = x - slot.trajectory.states[0]
        values.append(slot.value.evaluate(dx))
    if not values:
        raise ValueError("No mode carries a value expansion yet")
    return compose_value(np.array(values), alpha)
