import argparse
import logging

from config import config
from systems.task import list_tasks

log = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("list-tasks", help="List the shipped task ids.")
    parser.set_defaults(handler=handle_list_tasks)


async def handle_list_tasks(args: argparse.Namespace) -> int:
    """Handler for the list-tasks command. Prints one task id per line."""
    tasks = list_tasks(config.TASKS_DIR)
    log.debug("Found %s tasks in %s", len(tasks), config.TASKS_DIR)
    for task in tasks:
        print(task)
    return 0
