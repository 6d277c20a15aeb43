import argparse
import asyncio
import logging
import sys

from config import config
from handlers import run_commands, summary_commands, task_commands
from middlewares.exit_code_middleware import EXIT_FAILURE, ExitCodeMiddleware

log = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    """
    Builds the command-line parser with the run, summarize and list-tasks subcommands.

    Each handler module registers its own subparser and handler.
    """
    parser = argparse.ArgumentParser(
        prog="mmeddp",
        description="Benchmark vanilla, maximum-entropy and multimodal maximum-entropy DDP on trajectory optimization tasks.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    run_commands.register(subparsers)
    summary_commands.register(subparsers)
    task_commands.register(subparsers)
    return parser


async def main(args: argparse.Namespace) -> int:
    """Dispatches the parsed arguments to their subcommand handler through the exit code middleware."""
    middleware = ExitCodeMiddleware()
    return await middleware(args.handler, args)


def cli_main(argv: list[str] | None = None) -> int:
    """
    Main entry point of the command line.

    Returns:
        int: 0 on success, 2 on usage errors, 1 on runtime failures.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse has already printed usage text
        return e.code if isinstance(e.code, int) else 2

    config.setup_logging()
    log.debug("Parsed arguments: %s", args)
    return asyncio.run(main(args))


if __name__ == "__main__":
    try:
        sys.exit(cli_main())
    except KeyboardInterrupt as e:
        log.error("Stopped by user: %s", e)
        sys.exit(EXIT_FAILURE)
