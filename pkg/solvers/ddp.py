"""Vanilla DDP in iLQR form: backward Riccati pass, Q_uu regularization, line-searched rollouts.

The backward pass also has a maximum-entropy mode that additionally returns
the policy covariance Sigma_t = alpha Q_uu^-1 and the entropy accumulator V_H;
the gains are computed by the same code in both modes.

Obstacle bumps and the end-effector goal have indefinite Hessians. With
``convexify`` on (the default) the stage and terminal Hessians are projected
onto the PSD cone before the recursion, which keeps V_xx positive
semi-definite and Q_uu positive definite along any nominal. The
Levenberg-Marquardt shift mu is one value for the whole pass: when some
timestep needs more, the pass restarts from T with the larger mu, and the
solvers carry mu from one iteration to the next.
"""
from __future__ import annotations

import logging
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_solve

from errors import DivergedRolloutError, NumericError, NumericOverflowError, RegularizationError, TrajectoryShapeError
from solvers.types import BackwardResult, LocalPolicy, QExpansion, SolveResult, Trajectory, ValueExpansion
from systems.costs import CostExpansion, quadratize, quadratize_terminal
from systems.dynamics import linearize, step
from systems.task import SolverConfig, TaskDefinition, evaluate_cost

log = logging.getLogger(__name__)


class RegularizedQuu(NamedTuple):
    matrix: np.ndarray
    cholesky: np.ndarray
    mu: float


class _RestartPass(Exception):
    """A timestep needed a larger shift than the one the pass started with."""

    def __init__(self, mu: float):
        super().__init__(mu)
        self.mu = mu


def _mu_schedule(mu: float, mu_min: float, mu_max: float, factor: float) -> list[float]:
    schedule = [mu]
    candidate = mu * factor if mu > 0 else mu_min
    candidate = max(candidate, mu_min)
    while candidate <= mu_max * (1 + 1e-12):
        schedule.append(candidate)
        candidate *= factor
    return schedule


def regularize_quu(q_uu: np.ndarray, mu: float = 0.0, *, mu_min: float = 1e-6, mu_max: float = 1e6,
                   factor: float = 10.0, t: int | None = None) -> RegularizedQuu:
    """Shift Q_uu by mu I until it has a Cholesky factor.

    Tries mu, then mu_min (or mu * factor), multiplying by factor up to mu_max.

    Raises:
        RegularizationError: If Q_uu + mu_max I is still not positive definite.
    """
    eye = np.eye(q_uu.shape[0])
    for candidate in _mu_schedule(mu, mu_min, mu_max, factor):
        shifted = q_uu + candidate * eye if candidate > 0 else q_uu
        try:
            chol = np.linalg.cholesky(shifted)
        except np.linalg.LinAlgError:
            continue
        return RegularizedQuu(shifted, chol, candidate)
    raise RegularizationError(f"Q_uu not positive definite with mu up to {mu_max:.0e}", timestep=t)


def adapt_mu(mu: float, accepted: bool, cfg: SolverConfig) -> float:
    """Shift for the next iteration: shrink after an accepted step, grow after a rejected one."""
    if accepted:
        mu /= cfg.mu_factor
        return 0.0 if mu < cfg.mu_min else mu
    return min(max(cfg.mu_min, mu * cfg.mu_factor), cfg.mu_max)


def project_psd(h: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """Clip the eigenvalues of a symmetric matrix at floor. Matrices already above it come back as is."""
    eigvals, eigvecs = np.linalg.eigh(h)
    if eigvals[0] >= floor:
        return h
    clipped = (eigvecs * np.maximum(eigvals, floor)) @ eigvecs.T
    return 0.5 * (clipped + clipped.T)


def convexify(expansion: CostExpansion) -> CostExpansion:
    """Project the joint (x, u) Hessian of a stage cost onto the PSD cone."""
    n_x = expansion.l_xx.shape[0]
    joint = np.block([[expansion.l_xx, expansion.l_ux.T], [expansion.l_ux, expansion.l_uu]])
    projected = project_psd(joint)
    if projected is joint:
        return expansion
    return expansion._replace(l_xx=projected[:n_x, :n_x], l_ux=projected[n_x:, :n_x], l_uu=projected[n_x:, n_x:])


def q_expansion(l_x, l_u, l_xx, l_ux, l_uu, f_x, f_u, v_x, v_xx) -> QExpansion:
    """Q-function expansion with the second-order dynamics terms dropped."""
    q_xx = l_xx + f_x.T @ v_xx @ f_x
    q_uu = l_uu + f_u.T @ v_xx @ f_u
    return QExpansion(
        q_x=l_x + f_x.T @ v_x,
        q_u=l_u + f_u.T @ v_x,
        q_xx=0.5 * (q_xx + q_xx.T),
        q_ux=l_ux + f_u.T @ v_xx @ f_x,
        q_uu=0.5 * (q_uu + q_uu.T),
    )


def backward_pass(traj: Trajectory, task: TaskDefinition, alpha: float | None = None,
                  mu: float | None = None) -> BackwardResult:
    """Riccati-like recursion around a nominal trajectory.

    Args:
        traj: Dynamically consistent nominal trajectory.
        task: Task with dynamics, cost and regularization settings.
        alpha: None for the vanilla pass; the inverse temperature for the
            maximum-entropy pass, which adds Sigma_t and V_H.
        mu: Shift the pass starts with; task.solver.mu_init when None.

    Returns:
        BackwardResult with the local policy, the value expansion at t=0, V_H
        and the shift mu every timestep was solved with.

    Raises:
        RegularizationError: If Q_uu cannot be made positive definite.
        NumericError: If a value term becomes non-finite.
    """
    T = task.horizon
    if traj.horizon != T:
        raise TrajectoryShapeError(f"Trajectory horizon {traj.horizon} does not match task horizon {T}")
    mu = task.solver.mu_init if mu is None else mu
    while True:
        try:
            return _sweep(traj, task, alpha, mu)
        except _RestartPass as e:
            log.debug("Restarting backward pass with mu=%.1e (was %.1e)", e.mu, mu)
            mu = e.mu


def _sweep(traj: Trajectory, task: TaskDefinition, alpha: float | None, mu: float) -> BackwardResult:
    T = task.horizon
    cfg = task.solver
    n_x, n_u = task.dynamics.state_dim, task.dynamics.control_dim
    maxent = alpha is not None

    terminal = quadratize_terminal(task.cost, traj.states[T])
    v_bar, v_x = terminal.phi, terminal.phi_x
    v_xx = project_psd(terminal.phi_xx) if cfg.convexify else terminal.phi_xx
    v_h = 0.0
    expected_reduction = 0.0

    k = np.zeros((T, n_u))
    K = np.zeros((T, n_u, n_x))
    sigma = np.zeros((T, n_u, n_u))
    eye_u = np.eye(n_u)
    log_two_pi_alpha = n_u * np.log(2.0 * np.pi * alpha) if maxent else 0.0

    for t in range(T - 1, -1, -1):
        x_t, u_t = traj.states[t], traj.controls[t]
        expansion = quadratize(task.cost, x_t, u_t, t)
        if cfg.convexify:
            expansion = convexify(expansion)
        f_x, f_u = linearize(task.dynamics, x_t, u_t, t)
        q = q_expansion(expansion.l_x, expansion.l_u, expansion.l_xx, expansion.l_ux, expansion.l_uu,
                        f_x, f_u, v_x, v_xx)

        reg = regularize_quu(q.q_uu, mu, mu_min=cfg.mu_min, mu_max=cfg.mu_max, factor=cfg.mu_factor, t=t)
        if reg.mu > mu:
            raise _RestartPass(reg.mu)
        factor = (reg.cholesky, True)
        k_t = -cho_solve(factor, q.q_u)
        K_t = -cho_solve(factor, q.q_ux)
        k[t], K[t] = k_t, K_t

        # value update with the unshifted Q terms and the shifted gains
        dv = k_t @ q.q_u + 0.5 * k_t @ q.q_uu @ k_t
        expected_reduction += dv
        v_bar = v_bar + expansion.l + dv
        v_x = q.q_x + K_t.T @ q.q_uu @ k_t + K_t.T @ q.q_u + q.q_ux.T @ k_t
        v_xx = q.q_xx + K_t.T @ q.q_uu @ K_t + K_t.T @ q.q_ux + q.q_ux.T @ K_t
        v_xx = 0.5 * (v_xx + v_xx.T)

        if maxent:
            cov = alpha * cho_solve(factor, eye_u)
            sigma[t] = 0.5 * (cov + cov.T)
            log_det = 2.0 * np.sum(np.log(np.diag(reg.cholesky)))
            v_h += 0.5 * alpha * (log_det - log_two_pi_alpha)

        if not (np.isfinite(v_bar) and np.all(np.isfinite(v_x)) and np.all(np.isfinite(v_xx))):
            raise NumericError("Backward pass produced a non-finite value expansion", timestep=t)

    policy = LocalPolicy(k=k, K=K, sigma=sigma)
    value = ValueExpansion(v_bar=float(v_bar), v_x=v_x, v_xx=v_xx, v_h=float(v_h))
    return BackwardResult(policy=policy, value=value, v_h=float(v_h),
                          expected_reduction=float(expected_reduction), mu=mu)


def rollout(task: TaskDefinition, prev: Trajectory, policy: LocalPolicy, eta: float,
            noise: np.ndarray | None = None) -> Trajectory:
    """Forward pass u_t = u_bar_t + eta k_t + eps_t + K_t (x_t - x_bar_t).

    Raises:
        DivergedRolloutError: If a state or the cost becomes non-finite.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"Step scale eta must lie in [0, 1], got {eta}")
    T = task.horizon
    if noise is not None and noise.shape[0] != T:
        raise TrajectoryShapeError(f"Noise has {noise.shape[0]} entries, horizon is {T}")

    states = np.empty_like(prev.states)
    controls = np.empty_like(prev.controls)
    states[0] = prev.states[0]
    for t in range(T):
        u = prev.controls[t] + eta * policy.k[t]
        if noise is not None:
            u = u + noise[t]
        u = u + policy.K[t] @ (states[t] - prev.states[t])
        controls[t] = u
        try:
            states[t + 1] = step(task.dynamics, states[t], u, t)
        except NumericOverflowError as e:
            raise DivergedRolloutError("Rollout diverged", timestep=t) from e

    with np.errstate(all="ignore"):
        cost = evaluate_cost(task, states, controls)
    if not np.isfinite(cost):
        raise DivergedRolloutError("Rollout cost is not finite")
    return Trajectory(states=states, controls=controls, cost=cost)


def initial_trajectory(task: TaskDefinition, controls: np.ndarray | None = None) -> Trajectory:
    """Rollout of the given controls (zero controls by default) from x0."""
    T = task.horizon
    if controls is None:
        controls = np.zeros((T, task.dynamics.control_dim))
    states = np.empty((T + 1, task.dynamics.state_dim))
    states[0] = task.x0
    for t in range(T):
        states[t + 1] = step(task.dynamics, states[t], controls[t], t)
    return Trajectory(states=states, controls=np.array(controls, dtype=float),
                      cost=evaluate_cost(task, states, controls))


def line_search(task: TaskDefinition, prev: Trajectory, policy: LocalPolicy) -> tuple[Trajectory, bool]:
    """Backtrack eta over 1, 1/2, 1/4, ... and accept the first strict cost decrease."""
    for eta in task.solver.step_sizes:
        try:
            candidate = rollout(task, prev, policy, eta)
        except DivergedRolloutError as e:
            log.debug("Rejected eta=%.4g: %s", eta, e)
            continue
        if candidate.cost < prev.cost:
            return candidate, True
    return prev, False


def has_converged(costs: list[float], tolerance: float, patience: int) -> bool:
    """True once the cost decreased by at most tolerance (relative) over the last patience iterations."""
    if len(costs) <= patience:
        return False
    reference = costs[-1 - patience]
    return (reference - costs[-1]) <= tolerance * abs(reference)


def solve_vanilla(task: TaskDefinition) -> SolveResult:
    """Deterministic DDP from the zero-control rollout.

    Stops early once the relative decrease over the last ``patience``
    iterations is at most ``tolerance``, so the trace can be shorter than
    iterations + 1.
    """
    cfg = task.solver
    traj = initial_trajectory(task)
    costs = [traj.cost]
    log.info("Vanilla DDP on %s: initial cost %.6g", task.name, traj.cost)

    iteration = 0
    mu = cfg.mu_init
    for iteration in range(1, cfg.iterations + 1):
        result = backward_pass(traj, task, mu=mu)
        traj, accepted = line_search(task, traj, result.policy)
        mu = adapt_mu(result.mu, accepted, cfg)
        costs.append(traj.cost)
        log.debug("Iteration %s: cost %.10g (accepted=%s, expected reduction %.3g, mu %.1e)",
                  iteration, traj.cost, accepted, result.expected_reduction, result.mu)
        if has_converged(costs, cfg.tolerance, cfg.patience):
            log.debug("Converged after %s iterations.", iteration)
            break

    log.info("Vanilla DDP on %s finished: cost %.6g after %s iterations", task.name, traj.cost, iteration)
    return SolveResult(best=traj, costs=costs, slot_costs=[list(costs)], iterations=iteration)
