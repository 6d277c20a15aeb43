"""Unimodal maximum-entropy DDP: one elite slot and one explorer slot."""
from __future__ import annotations

import logging

import numpy as np

from solvers.modes import ModeRngs, ModeSet, resample, run_modes, sample_feedforward
from solvers.types import SolveResult
from systems.task import TaskDefinition

log = logging.getLogger(__name__)

__all__ = ["SolverState", "resample_step", "sample_feedforward", "solve_me"]

# The unimodal solver state is a two-slot ModeSet: slot 0 elite, slot 1 explorer.
SolverState = ModeSet


def elite_component(modes: ModeSet, rng: np.random.Generator) -> int:
    return modes.elite_index()


def resample_step(task: TaskDefinition, state: SolverState, rngs: ModeRngs) -> SolverState:
    """Move the lowest-cost slot into slot 0 and sample the explorer from its policy."""
    return resample(task, state, elite_component, rngs)


def solve_me(task: TaskDefinition) -> SolveResult:
    """Maximum-entropy DDP with an elite and an explorer slot."""
    return run_modes(task, 2, elite_component, label="ME-DDP")
