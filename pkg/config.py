import dotenv
import os
import sys
import logging
from pathlib import Path
from errors import ConfigError
from typing import Final

dotenv.load_dotenv()

BASE_DIR: Final[Path] = Path(__file__).resolve().parent
VALID_LOG_LEVELS: Final[tuple[str, ...]] = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

class Config():
    """Config class for storing environment variables."""
    def __init__(self):
        """Initializes and validates environment variables."""

        self.LOG_LEVEL: Final[str] = os.getenv("LOG_LEVEL", "INFO").upper()
        self.TASKS_DIR: Final[Path] = Path(os.getenv("TASKS_DIR") or BASE_DIR / "tasks")
        self.BENCH_WORKERS: Final[int] = self._get_int_env("BENCH_WORKERS", 1)
        self.SHOW_PROGRESS: Final[bool] = os.getenv("SHOW_PROGRESS", "True").upper() == "TRUE"
        # Logging levels for noisy loggers
        self.ASYNCIO_LOG_LEVEL: Final[str] = os.getenv("ASYNCIO_LOG_LEVEL", "WARNING").upper()
        self.NUMERIC_LOG_LEVEL: Final[str] = os.getenv("NUMERIC_LOG_LEVEL", self.LOG_LEVEL).upper()

        self._validate()

    def _get_int_env(self, key: str, default: int) -> int:
        """Retrieves an integer environment variable."""
        value = os.getenv(key)
        if value is None or value == "":
            return default
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"Environment variable {key} must be an integer, got '{value}'.")

    def _validate(self):
        """Performs validation checks on environment variables."""
        for name in ("LOG_LEVEL", "ASYNCIO_LOG_LEVEL", "NUMERIC_LOG_LEVEL"):
            level = getattr(self, name)
            if level not in VALID_LOG_LEVELS:
                raise ConfigError(f"Invalid log level for {name}: {level}. It must be one of {', '.join(VALID_LOG_LEVELS)}.")
        if self.BENCH_WORKERS < 1:
            raise ConfigError(f"BENCH_WORKERS must be at least 1, got {self.BENCH_WORKERS}.")

    def setup_logging(self):
        """Sets up logging."""
        logging.basicConfig(
            level=self.LOG_LEVEL,
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        )
        log = logging.getLogger(__name__)

        logging.getLogger("asyncio").setLevel(self.ASYNCIO_LOG_LEVEL)
        log.debug("Asyncio logging initialized at %s level.", self.ASYNCIO_LOG_LEVEL)
        for name in ("solvers", "systems"):
            logging.getLogger(name).setLevel(self.NUMERIC_LOG_LEVEL)
        log.debug("Solver logging initialized at %s level.", self.NUMERIC_LOG_LEVEL)

        log.info("Initialized logging at %s level.", self.LOG_LEVEL)

try:
    config = Config()
except ConfigError as e:
    logging.basicConfig(
        level="CRITICAL",
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )
    logging.critical("ConfigError: %s", e)
    sys.exit(1)
