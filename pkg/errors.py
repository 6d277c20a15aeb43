class ConfigError(Exception):
    """Base exception for configuration-related errors."""
    pass

class TaskError(Exception):
    """Base exception for task definition errors."""
    pass

class TaskConfigError(TaskError):
    """Raised when a task config file cannot be parsed or validated."""
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = path or "<task>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {message}")

class TaskNotFoundError(TaskError):
    """Raised when a task id does not name a shipped task or an existing file."""
    def __init__(self, task: str, available: list[str]):
        self.task = task
        self.available = available
        super().__init__(f"Unknown task '{task}'. Available tasks: {', '.join(available)}")

class SolverError(Exception):
    """Base exception for dynamics, cost and solver errors."""
    pass

class DimensionMismatchError(SolverError):
    """Raised when a state or control does not match the model dimensions."""
    pass

class TrajectoryShapeError(SolverError):
    """Raised when a trajectory length does not match the task horizon."""
    pass

class NumericError(SolverError):
    """Raised when a computation produces non-finite values."""
    def __init__(self, message: str, timestep: int | None = None):
        self.timestep = timestep
        if timestep is not None:
            message = f"{message} (t={timestep})"
        super().__init__(message)

class NumericOverflowError(NumericError):
    """Raised when a dynamics step leaves the finite range."""
    pass

class DivergedRolloutError(NumericError):
    """Raised when a rollout produces a non-finite state."""
    pass

class RegularizationError(NumericError):
    """Raised when Q_uu stays indefinite after the largest regularization."""
    pass

class CovarianceNotPDError(NumericError):
    """Raised when a policy covariance has no Cholesky factor."""
    pass

class BenchError(Exception):
    """Base exception for benchmark harness errors."""
    pass

class MissingGroupError(BenchError):
    """Raised when a (task, solver) group has no usable records."""
    pass

class RecordValidationError(BenchError):
    """Raised when a run record violates the non-increasing trace contract."""
    pass

class RepositoryError(Exception):
    """Base exception for result file errors."""
    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(message)

class UsageError(ValueError):
    """Raised when command-line arguments or overrides are invalid."""
    pass
