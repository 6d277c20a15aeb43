import argparse
import logging
from pathlib import Path

from repositories.RecordRepository import RecordRepository
from services.bench_service import SummaryStats, convergence_bands, summarize

log = logging.getLogger(__name__)


def _percent(value: float | None) -> str:
    return "-" if value is None else f"{value:+.2f}%"


def format_summary(stats: list[SummaryStats]) -> str:
    """Renders summary statistics as a plain-text table, one row per (task, solver)."""
    header = f"{'task':<12} {'solver':<8} {'runs':>4} {'mean':>12} {'std':>12} {'min':>12} {'max':>12} {'vs vanilla':>11} {'vs me':>9}"
    lines = [header, "-" * len(header)]
    for s in stats:
        lines.append(
            f"{s.task:<12} {s.solver:<8} {s.runs:>4} {s.mean:>12.4f} {s.std:>12.4f} {s.min:>12.4f} {s.max:>12.4f} "
            f"{_percent(s.delta_vs_vanilla):>11} {_percent(s.delta_vs_me):>9}"
        )
    return "\n".join(lines)


def register(subparsers) -> None:
    parser = subparsers.add_parser("summarize", help="Recompute statistics from saved run records.")
    parser.add_argument("--in", dest="source", type=Path, required=True,
                        help="results.json file or a directory holding runs.csv and traces.csv.")
    parser.add_argument("--out", type=Path, default=None, help="Directory to write the summary files to.")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.set_defaults(handler=handle_summarize)


async def handle_summarize(args: argparse.Namespace) -> int:
    """Handler for the summarize command."""
    log.debug("Handling summarize command for %s", args.source)
    records = await RecordRepository(args.source).load()
    stats = summarize(records)
    bands = convergence_bands(records)
    if args.out is not None:
        await RecordRepository(args.out).save(records, stats, bands, fmt=args.format)
    print(format_summary(stats))
    return 0
