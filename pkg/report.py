from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import pandas as pd
from rich.console import Console
from rich.table import Table
from simple_logger.logger import get_logger

from utilities.data_rate import DataRateReading, format_rate
from utilities.experiments import EXPERIMENT_COLUMNS, ExperimentSummary
from utilities.throughput import BENCH_COLUMNS, BenchRecord

LOGGER = get_logger(__name__)
BASIC_LOGGER = logging.getLogger("basic")

BENCH_SORT: tuple[str, str] = ("qubit_count", "p")
EXPERIMENT_SORT: tuple[str, ...] = ("lx", "ly", "lt", "p_z", "outcome")
# python objects pytest-harvest keeps next to each result
HARVEST_DROPPED: tuple[str, ...] = ("pytest_obj",)


def bench_frame(records: Iterable[BenchRecord]) -> pd.DataFrame:
    frame = pd.DataFrame([record.row() for record in records], columns=list(BENCH_COLUMNS))
    return frame.sort_values(by=list(BENCH_SORT), kind="stable", ignore_index=True)


def experiment_frame(summaries: Iterable[ExperimentSummary]) -> pd.DataFrame:
    rows = [row for summary in summaries for row in summary.rows()]
    frame = pd.DataFrame(rows, columns=list(EXPERIMENT_COLUMNS))
    return frame.sort_values(by=list(EXPERIMENT_SORT), kind="stable", ignore_index=True)


def write_csv(frame: pd.DataFrame, path: Path | str) -> Path:
    _path = Path(path)
    _path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(_path, index=False, float_format="%.9g")
    LOGGER.info(f"Wrote {len(frame)} rows to {_path}")
    return _path


def harvest_frame(results: pd.DataFrame) -> pd.DataFrame:
    """
    Flat table of the per-test results harvested over a pytest session, one row per test id.
    """
    frame = results.drop(columns=[column for column in HARVEST_DROPPED if column in results.columns])
    frame = frame.rename_axis("test_id").reset_index()
    return frame.sort_values(by="test_id", kind="stable", ignore_index=True)


def read_bench_csv(path: Path | str) -> pd.DataFrame:
    frame = pd.read_csv(path)
    _missing = [column for column in BENCH_COLUMNS if column not in frame.columns]
    if _missing:
        raise ValueError(f"{path} is not a bench CSV, missing columns {_missing}")
    return frame


def render_table(title: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    table = Table(title=title)
    for column in columns:
        table.add_column(column, justify="right" if column not in ("outcome", "boundary", "reading") else "left")
    for row in rows:
        table.add_row(*(f"{value:.4g}" if isinstance(value, float) else str(value) for value in row))

    console = Console(width=160, record=True, force_terminal=False)
    with console.capture() as capture:
        console.print(table)
    return capture.get()


def experiment_table(summary: ExperimentSummary) -> str:
    columns = ("outcome", "failures", "trials", "rate", "ci_low", "ci_high")
    return render_table(
        title=f"Logical failures [{summary.run_id}]",
        columns=columns,
        rows=([row[column] for column in columns] for row in summary.rows()),
    )


def bench_table(records: Sequence[BenchRecord]) -> str:
    columns = ("qubit_count", "p", "wall_time", "flips_matched", "flip_density", "reduction_ratio", "realtime_ratio")
    return render_table(
        title=f"Decoder throughput [{records[0].run_id if records else '-'}]",
        columns=columns,
        rows=([record.row()[column] for column in columns] for record in records),
    )


def data_rate_table(cells: Any, readings: Sequence[DataRateReading]) -> str:
    return render_table(
        title=f"Classical data rate for {cells} cells per cross-section",
        columns=("reading", "seconds_per_cell_layer", "bits_per_second"),
        rows=(
            (
                f"{r.sheets_per_layer} sheet(s) per layer",
                f"{float(r.seconds_per_cell_layer):.3e}",
                format_rate(value=r.bits_per_second),
            )
            for r in readings
        ),
    )


def show(text: str) -> None:
    BASIC_LOGGER.info(text)
