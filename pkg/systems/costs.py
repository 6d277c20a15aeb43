"""Running and terminal costs with soft Gaussian-bump obstacles."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Protocol

import numpy as np

from errors import NumericError
from systems.kinematics import LINK_LENGTHS, link_point_derivatives
from utils.decorator import numeric_error_handler

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Obstacle:
    """Soft obstacle. A 2D center applied to a 3D point is a vertical cylinder."""

    center: np.ndarray
    radius: float
    weight: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"Obstacle radius must be positive, got {self.radius}")


def _offset(point: np.ndarray, obstacle: Obstacle) -> np.ndarray:
    dims = obstacle.center.shape[0]
    return point[:dims] - obstacle.center


def obstacle_cost(point: np.ndarray, obstacle: Obstacle) -> float:
    """weight * exp(-d^2 / (2 r^2)) with d the distance from point to the obstacle center."""
    d = _offset(np.asarray(point, dtype=float), obstacle)
    return float(obstacle.weight * np.exp(-(d @ d) / (2.0 * obstacle.radius ** 2)))


def obstacle_derivatives(point: np.ndarray, obstacle: Obstacle) -> tuple[float, np.ndarray, np.ndarray]:
    """Value, gradient and Hessian of the bump w.r.t. the point."""
    point = np.asarray(point, dtype=float)
    dims = obstacle.center.shape[0]
    d = _offset(point, obstacle)
    r2 = obstacle.radius ** 2
    value = obstacle.weight * np.exp(-(d @ d) / (2.0 * r2))
    grad = np.zeros(point.shape[0])
    hess = np.zeros((point.shape[0], point.shape[0]))
    grad[:dims] = -value * d / r2
    hess[:dims, :dims] = value * (np.outer(d, d) / (r2 * r2) - np.eye(dims) / r2)
    return float(value), grad, hess


class PointMap(Protocol):
    """Maps a state to the task-space points that obstacles and task-space goals act on."""

    def points(self, x: np.ndarray) -> list[np.ndarray]: ...

    def derivatives(self, x: np.ndarray) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]: ...


@dataclass(frozen=True)
class StateSlice:
    """A single point read directly from state coordinates (vehicle position)."""

    indices: tuple[int, ...]
    state_dim: int

    def points(self, x):
        return [x[list(self.indices)]]

    def derivatives(self, x):
        jac = np.zeros((len(self.indices), self.state_dim))
        jac[np.arange(len(self.indices)), list(self.indices)] = 1.0
        hess = np.zeros((len(self.indices), self.state_dim, self.state_dim))
        return [(x[list(self.indices)], jac, hess)]


@dataclass(frozen=True)
class ArmPoints:
    """Link end points of the arm; the last point is the end effector. Angles are the first 7 state entries."""

    state_dim: int = 14
    link_lengths: tuple[float, ...] = LINK_LENGTHS

    def points(self, x):
        return [p for p, _, _ in self.derivatives(x)]

    def derivatives(self, x):
        out = []
        for p, jac, hess in link_point_derivatives(x[:7], self.link_lengths):
            jac_x = np.zeros((3, self.state_dim))
            jac_x[:, :7] = jac
            hess_x = np.zeros((3, self.state_dim, self.state_dim))
            hess_x[:, :7, :7] = hess
            out.append((p, jac_x, hess_x))
        return out


class CostExpansion(NamedTuple):
    l: float
    l_x: np.ndarray
    l_u: np.ndarray
    l_xx: np.ndarray
    l_ux: np.ndarray
    l_uu: np.ndarray


class TerminalExpansion(NamedTuple):
    phi: float
    phi_x: np.ndarray
    phi_xx: np.ndarray


def _symmetrize(h: np.ndarray) -> np.ndarray:
    return 0.5 * (h + h.T)


@dataclass(frozen=True, eq=False)
class CostModel:
    """Quadratic tracking cost around a goal plus obstacle bumps on task-space points.

    l(x, u, t) = 1/2 (x - g)^T Q (x - g) + 1/2 u^T R u + sum_obs bump(point(x))
    Phi(x)     = 1/2 (x - g)^T Qf (x - g) + 1/2 w_ee |p_ee(x) - g_ee|^2
    """

    goal: np.ndarray
    state_weight: np.ndarray
    control_weight: np.ndarray
    terminal_weight: np.ndarray
    obstacles: tuple[Obstacle, ...] = ()
    point_map: PointMap | None = None
    ee_goal: np.ndarray | None = None
    ee_weight: float = 0.0

    @property
    def state_dim(self) -> int:
        return self.goal.shape[0]

    @property
    def control_dim(self) -> int:
        return self.control_weight.shape[0]

    def _obstacle_value(self, x: np.ndarray) -> float:
        if not self.obstacles or self.point_map is None:
            return 0.0
        return sum(obstacle_cost(p, obs) for p in self.point_map.points(x) for obs in self.obstacles)

    def _obstacle_expansion(self, x: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        n = self.state_dim
        value, grad, hess = 0.0, np.zeros(n), np.zeros((n, n))
        if not self.obstacles or self.point_map is None:
            return value, grad, hess
        for p, jac, p_hess in self.point_map.derivatives(x):
            for obs in self.obstacles:
                c, c_p, c_pp = obstacle_derivatives(p, obs)
                value += c
                grad += jac.T @ c_p
                hess += jac.T @ c_pp @ jac + np.einsum("d,dij->ij", c_p, p_hess)
        return value, grad, hess

    def running(self, x: np.ndarray, u: np.ndarray, t: int = 0) -> float:
        dx = x - self.goal
        return float(0.5 * dx @ self.state_weight @ dx + 0.5 * u @ self.control_weight @ u
                     + self._obstacle_value(x))

    def terminal(self, x: np.ndarray) -> float:
        dx = x - self.goal
        value = 0.5 * dx @ self.terminal_weight @ dx
        if self.ee_goal is not None and self.ee_weight > 0.0:
            p_ee = self.point_map.points(x)[-1]
            e = p_ee - self.ee_goal
            value += 0.5 * self.ee_weight * (e @ e)
        return float(value)

    def quadratize(self, x: np.ndarray, u: np.ndarray, t: int = 0) -> CostExpansion:
        dx = x - self.goal
        obs_value, obs_grad, obs_hess = self._obstacle_expansion(x)
        l = 0.5 * dx @ self.state_weight @ dx + 0.5 * u @ self.control_weight @ u + obs_value
        l_x = self.state_weight @ dx + obs_grad
        l_u = self.control_weight @ u
        l_xx = _symmetrize(self.state_weight + obs_hess)
        l_uu = _symmetrize(self.control_weight.astype(float))
        l_ux = np.zeros((self.control_dim, self.state_dim))
        return CostExpansion(float(l), l_x, l_u, l_xx, l_ux, l_uu)

    def quadratize_terminal(self, x: np.ndarray) -> TerminalExpansion:
        dx = x - self.goal
        phi = 0.5 * dx @ self.terminal_weight @ dx
        phi_x = self.terminal_weight @ dx
        phi_xx = self.terminal_weight.astype(float).copy()
        if self.ee_goal is not None and self.ee_weight > 0.0:
            p, jac, hess = self.point_map.derivatives(x)[-1]
            e = p - self.ee_goal
            phi += 0.5 * self.ee_weight * (e @ e)
            phi_x = phi_x + self.ee_weight * jac.T @ e
            phi_xx = phi_xx + self.ee_weight * (jac.T @ jac + np.einsum("d,dij->ij", e, hess))
        return TerminalExpansion(float(phi), phi_x, _symmetrize(phi_xx))


def _require_finite(name: str, *arrays, t: int | None = None) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericError(f"{name} produced non-finite entries", timestep=t)


@numeric_error_handler
def quadratize(cost: CostModel, x: np.ndarray, u: np.ndarray, t: int = 0) -> CostExpansion:
    """Value, gradient and symmetric Hessian blocks of the running cost at (x, u)."""
    expansion = cost.quadratize(np.asarray(x, dtype=float), np.asarray(u, dtype=float), t)
    _require_finite("quadratize", *expansion[1:], t=t)
    return expansion


@numeric_error_handler
def quadratize_terminal(cost: CostModel, x: np.ndarray) -> TerminalExpansion:
    """Value, gradient and symmetric Hessian of the terminal cost."""
    expansion = cost.quadratize_terminal(np.asarray(x, dtype=float))
    _require_finite("quadratize_terminal", *expansion[1:])
    return expansion
