"""Immutable containers passed between the backward pass, rollouts and mode workers."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States x_0..x_T (T+1, n_x), controls u_0..u_{T-1} (T, n_u) and their realized cost."""

    states: np.ndarray
    controls: np.ndarray
    cost: float

    @property
    def horizon(self) -> int:
        return self.controls.shape[0]


@dataclass(frozen=True, eq=False)
class QExpansion:
    """Quadratic model of Q = l + V' o f at one timestep."""

    q_x: np.ndarray
    q_u: np.ndarray
    q_xx: np.ndarray
    q_ux: np.ndarray
    q_uu: np.ndarray


@dataclass(frozen=True, eq=False)
class ValueExpansion:
    """Quadratic value model around the nominal; v_h is zero for the vanilla backward pass."""

    v_bar: float
    v_x: np.ndarray
    v_xx: np.ndarray
    v_h: float = 0.0

    def evaluate(self, dx: np.ndarray) -> float:
        """V(x_bar + dx) = v_bar + v_h + V_x^T dx + 1/2 dx^T V_xx dx."""
        return float(self.v_bar + self.v_h + self.v_x @ dx + 0.5 * dx @ self.v_xx @ dx)


@dataclass(frozen=True, eq=False)
class LocalPolicy:
    """Time-varying Gaussian policy u_t ~ N(u_bar_t + k_t + K_t dx_t, Sigma_t)."""

    k: np.ndarray      # (T, n_u)
    K: np.ndarray      # (T, n_u, n_x)
    sigma: np.ndarray  # (T, n_u, n_u)

    @property
    def horizon(self) -> int:
        return self.k.shape[0]


@dataclass(frozen=True, eq=False)
class BackwardResult:
    policy: LocalPolicy
    value: ValueExpansion
    v_h: float
    expected_reduction: float = 0.0
    mu: float = 0.0


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Best trajectory and min-cost trace (index 0 is the initial cost)."""

    best: Trajectory
    costs: list[float]
    slot_costs: list[list[float]] = field(default_factory=list)
    weights: list[np.ndarray] = field(default_factory=list)
    iterations: int = 0
    frozen_updates: int = 0
