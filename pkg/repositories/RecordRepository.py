import csv
import io
import json
import logging
import os
from datetime import datetime, timezone
from pathlib import Path

import aiofiles
import aiofiles.os
from pydantic import ValidationError

from errors import RecordValidationError, RepositoryError, UsageError
from services.bench_service import ConvergenceRow, RunRecord, SummaryStats, trace_violations
from utils.decorator import io_error_handler

log = logging.getLogger(__name__)

RESULTS_SCHEMA_VERSION = 1
STD_KIND = "population"

TRACES_FILE = "traces.csv"
RUNS_FILE = "runs.csv"
SUMMARY_FILE = "summary.csv"
CONVERGENCE_FILE = "convergence.csv"
STATES_FILE = "states.csv"
RESULTS_FILE = "results.json"

TRACE_HEADER = ("task", "solver", "seed", "iter", "min_cost")
RUN_HEADER = ("task", "solver", "seed", "final_cost", "wall_time_s", "modes", "alpha", "resample_every",
              "status", "error")
SUMMARY_HEADER = ("task", "solver", "runs", "mean", "std", "min", "max", "delta_vs_vanilla", "delta_vs_me")
CONVERGENCE_HEADER = ("task", "solver", "iter", "mean", "std", "lower", "upper", "min", "max")
STATES_HEADER = ("task", "solver", "seed", "t", "state")


def _cell(value) -> str:
    return "" if value is None else str(value)


def _optional_float(text: str) -> float | None:
    return None if text == "" else float(text)


class RecordRepository:
    def __init__(self, out_dir: str | Path):
        """Initializes the RecordRepository with the directory results are written to and read from."""
        self.out_dir = Path(out_dir)

    @staticmethod
    def check_records(records: list[RunRecord]) -> None:
        """
        Rejects records whose min-cost trace increases.

        Raises:
            RecordValidationError: On the first violating record.
        """
        for record in records:
            bad = trace_violations(record.trace)
            if bad:
                raise RecordValidationError(
                    f"Record {record.task}/{record.solver}/seed {record.seed} has an increasing trace at iterations {bad}")

    @io_error_handler
    async def _write_atomic(self, path: Path, text: str) -> Path:
        """Writes text to a temporary sibling and moves it over path."""
        await aiofiles.os.makedirs(path.parent, exist_ok=True)
        tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
        async with aiofiles.open(tmp, "w", encoding="utf-8", newline="") as f:
            await f.write(text)
        await aiofiles.os.replace(tmp, path)
        log.debug("Wrote %s (%s bytes).", path, len(text))
        return path

    @io_error_handler
    async def _read(self, path: Path) -> str:
        async with aiofiles.open(path, "r", encoding="utf-8", newline="") as f:
            return await f.read()

    @staticmethod
    def _table(header: tuple[str, ...], rows) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buffer.getvalue()

    async def save(self, records: list[RunRecord], stats: list[SummaryStats], convergence: list[ConvergenceRow],
                   fmt: str = "csv") -> list[Path]:
        """
        Writes records, summary and convergence bands in the given format.

        CSV writes traces.csv, runs.csv, summary.csv and convergence.csv (plus
        states.csv when records carry final trajectories); JSON writes one
        results.json document.

        Raises:
            RecordValidationError: If a record's trace increases.
            RepositoryError: If a file cannot be written.
        """
        self.check_records(records)
        if fmt == "json":
            paths = [await self.write_json(records, stats, convergence)]
        elif fmt == "csv":
            paths = await self.write_csv(records, stats, convergence)
        else:
            raise UsageError(f"Unknown output format '{fmt}'")
        log.info("Saved %s records to %s.", len(records), ", ".join(str(p) for p in paths))
        return paths

    async def write_csv(self, records: list[RunRecord], stats: list[SummaryStats],
                        convergence: list[ConvergenceRow]) -> list[Path]:
        traces = [(r.task, r.solver, r.seed, i, c) for r in records for i, c in enumerate(r.trace)]
        runs = [tuple(_cell(getattr(r, name)) for name in RUN_HEADER) for r in records]
        summary = [tuple(_cell(getattr(s, name)) for name in SUMMARY_HEADER) for s in stats]
        bands = [tuple(getattr(row, name) for name in CONVERGENCE_HEADER) for row in convergence]

        paths = [
            await self._write_atomic(self.out_dir / TRACES_FILE, self._table(TRACE_HEADER, traces)),
            await self._write_atomic(self.out_dir / RUNS_FILE, self._table(RUN_HEADER, runs)),
            await self._write_atomic(self.out_dir / SUMMARY_FILE, self._table(SUMMARY_HEADER, summary)),
            await self._write_atomic(self.out_dir / CONVERGENCE_FILE, self._table(CONVERGENCE_HEADER, bands)),
        ]
        if any(r.states is not None for r in records):
            states = [(r.task, r.solver, r.seed, t, json.dumps(x)) for r in records if r.states is not None
                      for t, x in enumerate(r.states)]
            paths.append(await self._write_atomic(self.out_dir / STATES_FILE, self._table(STATES_HEADER, states)))
        return paths

    async def write_json(self, records: list[RunRecord], stats: list[SummaryStats],
                         convergence: list[ConvergenceRow]) -> Path:
        document = {
            "schema_version": RESULTS_SCHEMA_VERSION,
            "metadata": {
                "std": STD_KIND,
                "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            },
            "records": [r.model_dump(mode="json") for r in records],
            "summary": [s.model_dump(mode="json") for s in stats],
            "convergence": [row.model_dump(mode="json") for row in convergence],
        }
        return await self._write_atomic(self.out_dir / RESULTS_FILE, json.dumps(document, indent=2) + "\n")

    async def load(self, source: str | Path | None = None) -> list[RunRecord]:
        """
        Reads records back from a results.json file or from a directory of CSV files.

        Raises:
            RepositoryError: If the source does not exist or cannot be read.
            RecordValidationError: If a stored record is malformed or has an increasing trace.
        """
        source = Path(source) if source is not None else self.out_dir
        if source.is_dir() and (source / RUNS_FILE).is_file():
            records = await self.read_csv(source)
        elif source.is_dir() and (source / RESULTS_FILE).is_file():
            records = await self.read_json(source / RESULTS_FILE)
        elif source.is_file():
            records = await self.read_json(source)
        else:
            raise RepositoryError(f"No results found at {source}", path=str(source))
        log.info("Loaded %s records from %s.", len(records), source)
        return records

    async def read_json(self, path: Path) -> list[RunRecord]:
        text = await self._read(path)
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise RepositoryError(f"{path} is not valid JSON: {e}", path=str(path)) from e
        if document.get("schema_version") != RESULTS_SCHEMA_VERSION:
            raise RepositoryError(f"{path} has unsupported schema_version {document.get('schema_version')}",
                                  path=str(path))
        return self._validate([dict(r) for r in document.get("records", [])], path)

    async def read_csv(self, directory: Path) -> list[RunRecord]:
        runs = list(csv.DictReader(io.StringIO(await self._read(directory / RUNS_FILE))))
        traces: dict[tuple[str, str, int], list[tuple[int, float]]] = {}
        for row in csv.DictReader(io.StringIO(await self._read(directory / TRACES_FILE))):
            key = (row["task"], row["solver"], int(row["seed"]))
            traces.setdefault(key, []).append((int(row["iter"]), float(row["min_cost"])))
        states: dict[tuple[str, str, int], list[tuple[int, list[float]]]] = {}
        if (directory / STATES_FILE).is_file():
            for row in csv.DictReader(io.StringIO(await self._read(directory / STATES_FILE))):
                key = (row["task"], row["solver"], int(row["seed"]))
                states.setdefault(key, []).append((int(row["t"]), json.loads(row["state"])))

        raw = []
        for row in runs:
            key = (row["task"], row["solver"], int(row["seed"]))
            raw.append({
                "task": row["task"], "solver": row["solver"], "seed": int(row["seed"]),
                "final_cost": _optional_float(row["final_cost"]),
                "trace": [c for _, c in sorted(traces.get(key, []))],
                "wall_time_s": float(row["wall_time_s"]),
                "modes": int(row["modes"]), "alpha": float(row["alpha"]),
                "resample_every": int(row["resample_every"]),
                "status": row["status"], "error": row["error"] or None,
                "states": [x for _, x in sorted(states[key])] if key in states else None,
            })
        return self._validate(raw, directory)

    @staticmethod
    def _validate(raw: list[dict], source: Path) -> list[RunRecord]:
        records = []
        for i, item in enumerate(raw):
            try:
                records.append(RunRecord.model_validate(item))
            except ValidationError as e:
                raise RecordValidationError(f"Record {i} in {source} is invalid: {e.errors()[0]['msg']}") from e
        return records
