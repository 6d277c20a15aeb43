"""Dynamics models and their discretization.

Every model exposes the continuous vector field ``x_dot = F(x, u)`` and a
discrete step ``x' = f(x, u)``. Continuous models are discretized with
explicit RK4; the discrete Jacobians are propagated through the four RK4
stages so ``linearize`` is exact for the discretized map.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from errors import DimensionMismatchError, NumericError, NumericOverflowError
from utils.decorator import numeric_error_handler

log = logging.getLogger(__name__)

FD_STEP = 1e-6


@dataclass(frozen=True)
class DynamicsModel(ABC):
    """Deterministic discrete-time dynamics x_{t+1} = f(x_t, u_t)."""

    dt: float

    @property
    @abstractmethod
    def state_dim(self) -> int: ...

    @property
    @abstractmethod
    def control_dim(self) -> int: ...

    @abstractmethod
    def vector_field(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Continuous-time state derivative."""

    def vector_field_jacobians(self, x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Jacobians of the vector field; central finite differences unless a model overrides them."""
        n, m = self.state_dim, self.control_dim
        a = np.empty((n, n))
        b = np.empty((n, m))
        for i in range(n):
            dx = np.zeros(n)
            dx[i] = FD_STEP
            a[:, i] = (self.vector_field(x + dx, u) - self.vector_field(x - dx, u)) / (2 * FD_STEP)
        for j in range(m):
            du = np.zeros(m)
            du[j] = FD_STEP
            b[:, j] = (self.vector_field(x, u + du) - self.vector_field(x, u - du)) / (2 * FD_STEP)
        return a, b

    def step(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """One RK4 step of length dt."""
        h = self.dt
        k1 = self.vector_field(x, u)
        k2 = self.vector_field(x + 0.5 * h * k1, u)
        k3 = self.vector_field(x + 0.5 * h * k2, u)
        k4 = self.vector_field(x + h * k3, u)
        return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def linearize(self, x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Jacobians of the RK4 step, chained through the stages."""
        h = self.dt
        eye = np.eye(self.state_dim)

        k1 = self.vector_field(x, u)
        a1, b1 = self.vector_field_jacobians(x, u)
        dk1_dx, dk1_du = a1, b1

        x2 = x + 0.5 * h * k1
        k2 = self.vector_field(x2, u)
        a2, b2 = self.vector_field_jacobians(x2, u)
        dk2_dx = a2 @ (eye + 0.5 * h * dk1_dx)
        dk2_du = a2 @ (0.5 * h * dk1_du) + b2

        x3 = x + 0.5 * h * k2
        k3 = self.vector_field(x3, u)
        a3, b3 = self.vector_field_jacobians(x3, u)
        dk3_dx = a3 @ (eye + 0.5 * h * dk2_dx)
        dk3_du = a3 @ (0.5 * h * dk2_du) + b3

        x4 = x + h * k3
        a4, b4 = self.vector_field_jacobians(x4, u)
        dk4_dx = a4 @ (eye + h * dk3_dx)
        dk4_du = a4 @ (h * dk3_du) + b4

        f_x = eye + (h / 6.0) * (dk1_dx + 2.0 * dk2_dx + 2.0 * dk3_dx + dk4_dx)
        f_u = (h / 6.0) * (dk1_du + 2.0 * dk2_du + 2.0 * dk3_du + dk4_du)
        return f_x, f_u


def _check_dims(model: DynamicsModel, x: np.ndarray, u: np.ndarray) -> None:
    if x.shape != (model.state_dim,):
        raise DimensionMismatchError(
            f"{type(model).__name__} expects a state of shape ({model.state_dim},), got {x.shape}")
    if u.shape != (model.control_dim,):
        raise DimensionMismatchError(
            f"{type(model).__name__} expects a control of shape ({model.control_dim},), got {u.shape}")


def step(model: DynamicsModel, x: np.ndarray, u: np.ndarray, t: int | None = None) -> np.ndarray:
    """Advance the model one step.

    Raises:
        DimensionMismatchError: If x or u has the wrong shape.
        NumericOverflowError: If the next state is not finite.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    _check_dims(model, x, u)
    with np.errstate(all="ignore"):
        x_next = model.step(x, u)
    if not np.all(np.isfinite(x_next)):
        raise NumericOverflowError(f"{type(model).__name__} step produced a non-finite state", timestep=t)
    return x_next


@numeric_error_handler
def linearize(model: DynamicsModel, x: np.ndarray, u: np.ndarray, t: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Discrete Jacobians (f_x, f_u) of the model at (x, u)."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    _check_dims(model, x, u)
    f_x, f_u = model.linearize(x, u)
    if not (np.all(np.isfinite(f_x)) and np.all(np.isfinite(f_u))):
        raise NumericError(f"{type(model).__name__} Jacobian has non-finite entries", timestep=t)
    return f_x, f_u


def finite_difference_jacobians(model: DynamicsModel, x: np.ndarray, u: np.ndarray,
                                eps: float = FD_STEP) -> tuple[np.ndarray, np.ndarray]:
    """Central finite differences of the discrete step, used to check analytic Jacobians."""
    n, m = model.state_dim, model.control_dim
    f_x = np.empty((n, n))
    f_u = np.empty((n, m))
    for i in range(n):
        dx = np.zeros(n)
        dx[i] = eps
        f_x[:, i] = (model.step(x + dx, u) - model.step(x - dx, u)) / (2 * eps)
    for j in range(m):
        du = np.zeros(m)
        du[j] = eps
        f_u[:, j] = (model.step(x, u + du) - model.step(x, u - du)) / (2 * eps)
    return f_x, f_u
