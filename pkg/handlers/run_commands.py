import argparse
import logging
from pathlib import Path

from config import config
from errors import MissingGroupError, UsageError
from handlers.summary_commands import format_summary
from repositories.RecordRepository import RecordRepository
from services.bench_service import SOLVER_IDS, RunRecord, convergence_bands, run_experiment, summarize
from systems.task import list_tasks
from utils.seeds import parse_seeds

log = logging.getLogger(__name__)


def _split(value: str, every: list[str]) -> list[str]:
    """Comma-separated names; 'all' expands to every known name."""
    if value == "all":
        return list(every)
    return [part.strip() for part in value.split(",") if part.strip()]


def register(subparsers) -> None:
    parser = subparsers.add_parser("run", help="Run solvers on tasks over a set of seeds.")
    parser.add_argument("--task", required=True,
                        help="Task id, path to a task file, a comma-separated list or 'all'.")
    parser.add_argument("--solver", default="all",
                        help="vanilla, me, mme, a comma-separated list or 'all' (default).")
    parser.add_argument("--seeds", default=None,
                        help="Seed count ('16'), list ('0,3,7') or inclusive range ('0-15'). Default: 16 seeds.")
    parser.add_argument("--alpha", type=float, default=None, help="Inverse temperature; overrides the task config.")
    parser.add_argument("--modes", type=int, default=None, help="Number of MME-DDP modes.")
    parser.add_argument("--resample-every", type=int, default=None,
                        help="Iterations between resamples (task configs use 8).")
    parser.add_argument("--iters", type=int, default=None, help="Iteration budget.")
    parser.add_argument("--out", type=Path, default=None, help="Directory to write results to.")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--trajectories", action="store_true", help="Also store the final state trajectories.")
    parser.set_defaults(handler=handle_run)


async def handle_run(args: argparse.Namespace) -> int:
    """
    Handler for the run command.

    Runs every requested (task, solver) pair over the seeds, prints the
    summary table and saves the results when --out is given. Records are
    saved even when a group has no successful run; the command then fails.
    """
    seeds = parse_seeds(args.seeds)
    tasks = _split(args.task, list_tasks(config.TASKS_DIR))
    solvers = _split(args.solver, list(SOLVER_IDS))
    unknown = [s for s in solvers if s not in SOLVER_IDS]
    if unknown:
        raise UsageError(f"Unknown solver(s) {', '.join(unknown)}; expected {', '.join(SOLVER_IDS)} or all")
    overrides = {
        "alpha": args.alpha, "modes": args.modes,
        "resample_every": args.resample_every, "iterations": args.iters,
    }
    log.info("Running %s on %s with %s seeds.", ", ".join(solvers), ", ".join(tasks), len(seeds))

    records: list[RunRecord] = []
    for task in tasks:
        for solver in solvers:
            records.extend(await run_experiment(
                task, solver, seeds, config.TASKS_DIR, overrides,
                workers=config.BENCH_WORKERS, progress=config.SHOW_PROGRESS, keep_states=args.trajectories,
            ))

    repository = RecordRepository(args.out) if args.out is not None else None
    try:
        stats = summarize(records)
    except MissingGroupError:
        if repository is not None:
            await repository.save(records, [], convergence_bands(records), fmt=args.format)
        raise
    if repository is not None:
        await repository.save(records, stats, convergence_bands(records), fmt=args.format)
    if stats:
        print(format_summary(stats))
    return 0
