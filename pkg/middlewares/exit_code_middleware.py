from argparse import Namespace
from typing import Awaitable, Callable
import logging
import sys

from errors import BenchError, RepositoryError, SolverError, TaskConfigError, TaskNotFoundError, UsageError

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

class ExitCodeMiddleware:
    def __init__(self, stderr=None):
        """
        Initialize the middleware.

        Args:
            stderr: Stream user-facing error messages are written to. Defaults to sys.stderr.
        """
        self.stderr = stderr
        log.debug("Exit code middleware initialized.")

    def _report(self, message: str) -> None:
        print(message, file=self.stderr or sys.stderr)

    async def __call__(self, handler: Callable[[Namespace], Awaitable[int | None]], args: Namespace) -> int:
        """
        Calls a subcommand handler and turns its outcome into a process exit code.

        Exception handling:
            Unknown tasks and invalid arguments (UsageError) map to 2, every other
            failure, including stray ValueErrors from the numerics, to 1.

        Args:
            handler (Callable[[Namespace], Awaitable[int | None]]): The subcommand handler.
            args (Namespace): Parsed command-line arguments.

        Returns:
            int: 0 on success, 2 on usage errors, 1 on runtime failures.
        """
        command = getattr(args, "command", None)
        try:
            result = await handler(args)
            log.debug("Command %s finished.", command)
            return EXIT_OK if result is None else result
        except TaskNotFoundError as e:
            log.error("Command %s failed: %s", command, e)
            self._report(str(e))
            return EXIT_USAGE
        except UsageError as e:
            log.error("Invalid arguments for %s: %s", command, e)
            self._report(f"error: {e}")
            return EXIT_USAGE
        except (TaskConfigError, SolverError, BenchError, RepositoryError) as e:
            log.error("Command %s failed: %s", command, e)
            self._report(f"error: {e}")
            return EXIT_FAILURE
        except Exception as e:
            log.critical("Unexpected error in command %s: %s", command, e, exc_info=True)
            self._report(f"error: {e}")
            return EXIT_FAILURE
