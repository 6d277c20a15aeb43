"""The benchmark dynamics: point mass, car, quadcopter, manipulator, plus a linear test system."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from systems.dynamics import DynamicsModel

GRAVITY = 9.81


@dataclass(frozen=True, eq=False)
class LinearSystem(DynamicsModel):
    """Discrete linear system x' = A x + B u; dt is informational only."""

    a: np.ndarray = field(default_factory=lambda: np.eye(1))
    b: np.ndarray = field(default_factory=lambda: np.eye(1))

    @property
    def state_dim(self) -> int:
        return self.a.shape[0]

    @property
    def control_dim(self) -> int:
        return self.b.shape[1]

    def vector_field(self, x, u):
        # Continuous form (A - I)/dt is only used for equilibrium checks.
        return ((self.a - np.eye(self.state_dim)) @ x + self.b @ u) / self.dt

    def step(self, x, u):
        return self.a @ x + self.b @ u

    def linearize(self, x, u):
        return self.a.copy(), self.b.copy()


@dataclass(frozen=True)
class PointMass(DynamicsModel):
    """Double integrator with state [p (dim), v (dim)] and acceleration control, discretized exactly."""

    dim: int = 2

    @property
    def state_dim(self) -> int:
        return 2 * self.dim

    @property
    def control_dim(self) -> int:
        return self.dim

    def vector_field(self, x, u):
        return np.concatenate([x[self.dim:], u])

    def _matrices(self) -> tuple[np.ndarray, np.ndarray]:
        d, h = self.dim, self.dt
        eye = np.eye(d)
        a = np.block([[eye, h * eye], [np.zeros((d, d)), eye]])
        b = np.vstack([0.5 * h * h * eye, h * eye])
        return a, b

    def step(self, x, u):
        a, b = self._matrices()
        return a @ x + b @ u

    def linearize(self, x, u):
        return self._matrices()


@dataclass(frozen=True)
class Car(DynamicsModel):
    """Dubins vehicle under jerk control: x = [p_x, p_y, theta, v, a], u = [omega, jerk]."""

    @property
    def state_dim(self) -> int:
        return 5

    @property
    def control_dim(self) -> int:
        return 2

    def vector_field(self, x, u):
        _, _, theta, v, acc = x
        omega, jerk = u
        return np.array([v * np.cos(theta), v * np.sin(theta), omega, acc, jerk])

    def vector_field_jacobians(self, x, u):
        _, _, theta, v, _ = x
        a = np.zeros((5, 5))
        a[0, 2] = -v * np.sin(theta)
        a[0, 3] = np.cos(theta)
        a[1, 2] = v * np.cos(theta)
        a[1, 3] = np.sin(theta)
        a[3, 4] = 1.0
        b = np.zeros((5, 2))
        b[2, 0] = 1.0
        b[4, 1] = 1.0
        return a, b


@dataclass(frozen=True)
class Quadcopter(DynamicsModel):
    """Rigid-body quadrotor.

    State [p_x, p_y, p_z, psi, theta, phi, v_x, v_y, v_z, p, q, r] with
    world-frame velocity and ZYX Euler angles (yaw psi, pitch theta, roll phi);
    body rates (p, q, r). Control [f_t, tau_x, tau_y, tau_z] where f_t is the
    collective thrust on top of hover thrust mass * g.
    """

    mass: float = 1.0
    inertia: tuple[float, float, float] = (0.01, 0.01, 0.02)
    gravity: float = GRAVITY

    @property
    def state_dim(self) -> int:
        return 12

    @property
    def control_dim(self) -> int:
        return 4

    def vector_field(self, x, u):
        psi, theta, phi = x[3], x[4], x[5]
        vel = x[6:9]
        p, q, r = x[9], x[10], x[11]
        thrust = self.mass * self.gravity + u[0]
        ix, iy, iz = self.inertia

        cphi, sphi = np.cos(phi), np.sin(phi)
        cth, sth = np.cos(theta), np.sin(theta)
        cpsi, spsi = np.cos(psi), np.sin(psi)

        psi_dot = (sphi * q + cphi * r) / cth
        theta_dot = cphi * q - sphi * r
        phi_dot = p + (sphi * q + cphi * r) * sth / cth

        # third column of R = Rz(psi) Ry(theta) Rx(phi)
        z_body = np.array([
            cphi * sth * cpsi + sphi * spsi,
            cphi * sth * spsi - sphi * cpsi,
            cphi * cth,
        ])
        acc = thrust / self.mass * z_body - np.array([0.0, 0.0, self.gravity])

        p_dot = ((iy - iz) * q * r + u[1]) / ix
        q_dot = ((iz - ix) * p * r + u[2]) / iy
        r_dot = ((ix - iy) * p * q + u[3]) / iz

        return np.concatenate([vel, [psi_dot, theta_dot, phi_dot], acc, [p_dot, q_dot, r_dot]])


@dataclass(frozen=True)
class Manipulator(DynamicsModel):
    """Seven decoupled torque-driven joints: x = [theta (7), theta_dot (7)], theta_ddot = tau / inertia."""

    inertia: tuple[float, ...] = (1.0,) * 7

    @property
    def state_dim(self) -> int:
        return 14

    @property
    def control_dim(self) -> int:
        return 7

    def vector_field(self, x, u):
        return np.concatenate([x[7:], u / np.asarray(self.inertia)])

    def vector_field_jacobians(self, x, u):
        a = np.zeros((14, 14))
        a[:7, 7:] = np.eye(7)
        b = np.zeros((14, 7))
        b[7:, :] = np.diag(1.0 / np.asarray(self.inertia))
        return a, b
