from solvers.ddp import backward_pass, line_search, regularize_quu, rollout, solve_vanilla
from solvers.me_ddp import resample_step, solve_me
from solvers.mme_ddp import compose_terminal_value, compose_value, compute_weights, resample_modes, solve_mme
from solvers.modes import ModeSet, sample_feedforward
from solvers.types import LocalPolicy, QExpansion, SolveResult, Trajectory, ValueExpansion

SOLVERS = {
    "vanilla": solve_vanilla,
    "me": solve_me,
    "mme": solve_mme,
}

__all__ = [
    "LocalPolicy", "ModeSet", "QExpansion", "SOLVERS", "SolveResult", "Trajectory", "ValueExpansion",
    "backward_pass", "compose_terminal_value", "compose_value", "compute_weights", "line_search",
    "regularize_quu", "resample_modes", "resample_step", "rollout", "sample_feedforward", "solve_me",
    "solve_mme", "solve_vanilla",
]
