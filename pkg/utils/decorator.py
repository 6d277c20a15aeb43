import functools
from errors import NumericError, RepositoryError
from pathlib import Path
import logging
import numpy as np

log = logging.getLogger(__name__)

def numeric_error_handler(func):
    """A decorator that wraps numeric routines to turn floating-point and linear-algebra failures into a NumericError."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            with np.errstate(over="raise", invalid="raise", divide="raise"):
                return func(*args, **kwargs)
        except (FloatingPointError, np.linalg.LinAlgError) as e:
            log.error("Numeric error occured when calling %s: %s", func.__qualname__, e, exc_info=True)
            raise NumericError(f"Numeric error in {func.__qualname__}: {e}") from e
    return wrapper

def io_error_handler(func):
    """A decorator that wraps async file operations to turn OS errors into a RepositoryError carrying the path."""
    @functools.wraps(func)
    async def wrapper(*args, **kwargs):
        try:
            return await func(*args, **kwargs)
        except OSError as e:
            path = e.filename or next((a for a in args[1:] if isinstance(a, (str, Path))), None)
            log.error("IO error occured when calling %s on %s: %s", func.__qualname__, path, e, exc_info=True)
            raise RepositoryError(f"Could not access {path}: {e.strerror or e}", path=str(path) if path else None) from e
    return wrapper
