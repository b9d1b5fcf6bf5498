"""
tqc-bench: logical-error experiments, throughput sweeps, data-rate arithmetic and TQCS
stream record/replay.

Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 invariant violation.
"""

from __future__ import annotations

import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Annotated, Any

import click
import typer
from simple_logger.logger import get_logger

import report
from exceptions.exceptions import (
    ExperimentConfigError,
    InvalidLatticeDimsError,
    InvalidNoiseChannelError,
    InvariantViolationError,
    OddSyndromeError,
    StreamFormatError,
    StreamOrderError,
    WindowOverflowError,
)
from libs.corrections import CorrectionSet
from libs.decoders.batch import BatchDecoder
from libs.decoders.stream import DecodeWindowConfig, StreamDecoder
from libs.lattice import BoundaryMode, LatticeDims
from libs.matching.components import MatchingOptions
from libs.noise import ErrorPattern, reduce_to_z, sample_errors
from libs.pipeline import collect_stream_corrections, verify
from libs.syndrome import DetectorLayout, iter_detector_sheets
from utilities.config import ExperimentConfig, build_config, dump_config
from utilities.corrections_format import corrections_digest, write_corrections
from utilities.data_rate import BITS_PER_CELL, DEFAULT_SHEET_PERIOD, data_rate, data_rate_readings, format_rate
from utilities.experiments import run_logical_experiment
from utilities.logger import logging_configured, separator, setup_logging, teardown_logging
from utilities.naming import generate_run_id
from utilities.stream_format import infer_dims, iter_stream, write_stream
from utilities.throughput import DEFAULT_SHEET_PERIOD as BENCH_SHEET_PERIOD
from utilities.throughput import MIN_REPEATS, BenchConfig, run_throughput_bench

LOGGER = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INVARIANT = 3

USAGE_ERRORS = (
    click.ClickException,
    click.exceptions.Abort,
    ExperimentConfigError,
    InvalidLatticeDimsError,
    InvalidNoiseChannelError,
)
DATA_ERRORS = (StreamFormatError, StreamOrderError, WindowOverflowError)
INVARIANT_ERRORS = (InvariantViolationError, OddSyndromeError)

app = typer.Typer(
    name="tqc-bench",
    help="Matching decoder for topological cluster-state error correction.",
    no_args_is_help=True,
    pretty_exceptions_enable=False,
)

ConfigOption = Annotated[Path | None, typer.Option("--config", help="key=value experiment config file")]
LxOption = Annotated[int | None, typer.Option("--lx", help="Cells along x")]
LyOption = Annotated[int | None, typer.Option("--ly", help="Cells along y")]
LtOption = Annotated[int | None, typer.Option("--lt", help="Cell layers along t")]
POption = Annotated[float | None, typer.Option("--p", help="Sets p_x = p_z = p and p_xz = p**2")]
SeedOption = Annotated[int | None, typer.Option("--seed", help="64-bit master seed")]
WindowOption = Annotated[int | None, typer.Option("--window", help="Sheets held by the stream decoder")]
LagOption = Annotated[int | None, typer.Option("--lag", help="Sheets between arrival and commit")]
BoundaryOption = Annotated[str | None, typer.Option("--boundary", help="periodic or open spatial boundary")]
WorkersOption = Annotated[int | None, typer.Option("--workers", help="Worker threads")]
OutOption = Annotated[Path | None, typer.Option("--out", help="Output file")]


@app.callback()
def _setup(
    ctx: typer.Context,
    log_level: Annotated[str, typer.Option("--log-level", help="Logging level")] = "INFO",
    log_file: Annotated[str | None, typer.Option("--log-file", help="Also log to this file")] = None,
) -> None:
    levels = logging.getLevelNamesMapping()
    if log_level.upper() not in levels:
        raise typer.BadParameter(f"unknown level {log_level!r}", param_hint="--log-level")

    if not logging_configured():
        listener = setup_logging(log_level=levels[log_level.upper()], log_file=log_file)
        ctx.call_on_close(lambda: teardown_logging(log_listener=listener))


def _overrides(**values: Any) -> dict[str, Any]:
    return {key: value for key, value in values.items() if value is not None}


def _write_corrections(
    corrections: Sequence[CorrectionSet], layout: DetectorLayout, out: Path | None, binary: bool
) -> str:
    digest = corrections_digest(corrections=corrections)
    if out:
        write_corrections(path=out, corrections=corrections, layout=layout, binary=binary)
        LOGGER.info(f"Wrote {sum(len(c) for c in corrections)} corrected qubits to {out}")
    return digest


@app.command()
def simulate(
    config: ConfigOption = None,
    lx: LxOption = None,
    ly: LyOption = None,
    lt: LtOption = None,
    p: POption = None,
    p_x: Annotated[float | None, typer.Option("--p-x")] = None,
    p_z: Annotated[float | None, typer.Option("--p-z")] = None,
    p_xz: Annotated[float | None, typer.Option("--p-xz")] = None,
    seed: SeedOption = None,
    trials: Annotated[int | None, typer.Option("--trials", help="Monte-Carlo trials")] = None,
    mode: Annotated[str | None, typer.Option("--mode", help="batch or stream")] = None,
    window: WindowOption = None,
    lag: LagOption = None,
    boundary: BoundaryOption = None,
    measurement_error: Annotated[float | None, typer.Option("--measurement-error")] = None,
    sparsify: Annotated[bool | None, typer.Option("--sparsify/--no-sparsify")] = None,
    workers: WorkersOption = None,
    out: OutOption = None,
) -> None:
    """
    Monte-Carlo logical failure rates with Wilson 95% intervals.
    """
    cfg = build_config(
        config_file=config,
        overrides=_overrides(
            lx=lx,
            ly=ly,
            lt=lt,
            p=p,
            p_x=p_x,
            p_z=p_z,
            p_xz=p_xz,
            seed=seed,
            trials=trials,
            mode=mode,
            window=window,
            lag=lag,
            boundary=boundary,
            measurement_error=measurement_error,
            sparsify=sparsify,
            workers=workers,
            out=str(out) if out else None,
        ),
    )
    LOGGER.debug(f"Resolved config:\n{dump_config(cfg=cfg)}")

    summary = run_logical_experiment(cfg=cfg)
    report.show(text=report.experiment_table(summary=summary))
    if cfg.out:
        report.write_csv(frame=report.experiment_frame(summaries=[summary]), path=cfg.out)


@app.command()
def decode(
    config: ConfigOption = None,
    lx: LxOption = None,
    ly: LyOption = None,
    lt: LtOption = None,
    p: POption = None,
    seed: SeedOption = None,
    mode: Annotated[str | None, typer.Option("--mode", help="batch or stream")] = None,
    window: WindowOption = None,
    lag: LagOption = None,
    boundary: BoundaryOption = None,
    workers: WorkersOption = None,
    binary: Annotated[bool, typer.Option("--binary", help="Write TQCC records instead of text")] = False,
    out: OutOption = None,
) -> None:
    """
    Sample one error pattern, decode it and verify the corrections.
    """
    cfg = build_config(
        config_file=config,
        overrides=_overrides(
            lx=lx, ly=ly, lt=lt, p=p, seed=seed, mode=mode, window=window, lag=lag, boundary=boundary, workers=workers
        ),
    )
    errors, _corrections, dims = _decode_one(cfg=cfg)
    digest = _write_corrections(corrections=_corrections, layout=DetectorLayout(dims=dims), out=out, binary=binary)

    verdict = verify(errors=errors, corrections=_corrections, dims=dims)
    if not verdict.residual_syndrome_empty:
        raise InvariantViolationError(f"Corrections for seed {cfg.seed} left a residual syndrome")

    report.show(text=f"errors={len(errors)} corrected={sum(len(c) for c in _corrections)} digest={digest}")
    if verdict.logical_failure is not None:
        failed = [str(_class) for _class, value in verdict.logical_failure.items() if value]
        report.show(text=f"logical failure: {', '.join(failed) or 'none'}")


def _decode_one(cfg: ExperimentConfig) -> tuple[ErrorPattern, tuple[CorrectionSet, CorrectionSet], LatticeDims]:
    # streamed volumes never wrap in t
    dims = cfg.dims if cfg.mode == "batch" else cfg.dims.with_time_boundary(BoundaryMode.OPEN)
    errors = sample_errors(dims=dims, channel=cfg.channel, seed=cfg.seed)
    options = MatchingOptions(
        sparsify_k=cfg.sparsify_k if cfg.sparsify else None,
        canonical_limit=cfg.canonical_limit,
        workers=cfg.workers,
    )
    if cfg.mode == "batch":
        return errors, BatchDecoder(dims=dims, options=options).decode(errors=errors).corrections, dims

    primal_z, dual_z = reduce_to_z(pattern=errors, dims=dims)
    sheets = iter_detector_sheets(z_errors=primal_z | dual_z, dims=dims, seed=cfg.seed)
    decoder = StreamDecoder(dims=dims, config=cfg.window_config, options=options)
    return errors, collect_stream_corrections(emitted=decoder.decode(sheets=sheets)), dims


@app.command()
def bench(
    size: Annotated[list[int], typer.Option("--size", help="Cells per side; repeat for a sweep")],
    p: Annotated[list[float], typer.Option("--p", help="Error rate; repeat for a sweep")],
    lt: Annotated[int, typer.Option("--lt")] = 2,
    boundary: Annotated[str, typer.Option("--boundary")] = BoundaryMode.OPEN.value,
    repeats: Annotated[int, typer.Option("--repeats")] = MIN_REPEATS,
    seed: Annotated[int, typer.Option("--seed")] = 0,
    sheet_period: Annotated[float, typer.Option("--sheet-period", help="Seconds per sheet")] = BENCH_SHEET_PERIOD,
    out: OutOption = None,
) -> None:
    """
    Median decode time per volume against cross-section qubit count, one curve per p.
    """
    try:
        _boundary = BoundaryMode(boundary)
    except ValueError as exp:
        raise typer.BadParameter(f"{boundary!r} is not periodic or open", param_hint="--boundary") from exp

    cfg = BenchConfig(
        sizes=tuple(size),
        ps=tuple(p),
        lt=lt,
        boundary=_boundary,
        repeats=repeats,
        seed=seed,
        sheet_period=sheet_period,
    )
    records = run_throughput_bench(cfg=cfg)
    report.show(text=report.bench_table(records=records))
    if out:
        report.write_csv(frame=report.bench_frame(records=records), path=out)


@app.command()
def rate(
    cells: Annotated[str, typer.Option("--cells", help="Cells per 2D cross-section")],
    bits_per_cell: Annotated[str, typer.Option("--bits-per-cell")] = str(BITS_PER_CELL),
    seconds_per_layer: Annotated[str | None, typer.Option("--seconds-per-layer")] = None,
    sheet_period: Annotated[str, typer.Option("--sheet-period")] = str(DEFAULT_SHEET_PERIOD),
) -> None:
    """
    Classical bits per second a real-time decoder must ingest.

    With --seconds-per-layer the rate is printed once; otherwise it is printed for one and for
    three sheets per cell layer at --sheet-period.
    """
    if seconds_per_layer is not None:
        _rate = data_rate(
            cells_per_cross_section=cells, bits_per_cell=bits_per_cell, seconds_per_cell_layer=seconds_per_layer
        )
        report.show(text=format_rate(value=_rate))
        return

    readings = data_rate_readings(
        cells_per_cross_section=cells, sheet_period=sheet_period, bits_per_cell=bits_per_cell
    )
    report.show(text=report.data_rate_table(cells=cells, readings=readings))


@app.command()
def record(
    out: Annotated[Path, typer.Option("--out", help="TQCS file to write")],
    config: ConfigOption = None,
    lx: LxOption = None,
    ly: LyOption = None,
    lt: LtOption = None,
    p: POption = None,
    seed: SeedOption = None,
    boundary: BoundaryOption = None,
    measurement_error: Annotated[float | None, typer.Option("--measurement-error")] = None,
    bounded: Annotated[bool, typer.Option("--bounded/--unbounded", help="Store the sheet count")] = True,
) -> None:
    """
    Synthesize a detector stream and write it as TQCS.
    """
    cfg = build_config(
        config_file=config,
        overrides=_overrides(
            lx=lx, ly=ly, lt=lt, p=p, seed=seed, boundary=boundary, measurement_error=measurement_error
        ),
    )
    dims = cfg.dims.with_time_boundary(BoundaryMode.OPEN)
    _errors = sample_errors(dims=dims, channel=cfg.channel, seed=cfg.seed)
    primal_z, dual_z = reduce_to_z(pattern=_errors, dims=dims)
    sheets = iter_detector_sheets(
        z_errors=primal_z | dual_z, dims=dims, seed=cfg.seed, measurement_error=cfg.measurement_error
    )
    written = write_stream(target=out, sheets=sheets, layout=DetectorLayout(dims=dims), bounded=bounded)
    LOGGER.info(f"Recorded {len(_errors)} errors on {dims} to {out} ({written} bytes)")


@app.command()
def replay(
    stream: Annotated[Path, typer.Argument(help="TQCS file to decode", exists=True, dir_okay=False)],
    boundary: Annotated[str, typer.Option("--boundary")] = BoundaryMode.PERIODIC.value,
    window: WindowOption = None,
    lag: LagOption = None,
    workers: Annotated[int, typer.Option("--workers")] = 1,
    binary: Annotated[bool, typer.Option("--binary", help="Write TQCC records instead of text")] = False,
    out: OutOption = None,
) -> None:
    """
    Decode a recorded TQCS stream with the sliding-window decoder.
    """
    try:
        _boundary = BoundaryMode(boundary)
    except ValueError as exp:
        raise typer.BadParameter(f"{boundary!r} is not periodic or open", param_hint="--boundary") from exp

    _window = DecodeWindowConfig(**_overrides(window_sheets=window, commit_lag=lag))
    run_id = generate_run_id(prefix="replay")
    with open(stream, "rb") as fd:
        header, sheets = iter_stream(fd=fd)
        dims = infer_dims(header=header, boundary_mode=_boundary)
        LOGGER.info(
            f"[{run_id}] replaying {stream} as {dims}, window {_window.window_sheets} lag {_window.commit_lag}"
        )
        _decoder = StreamDecoder(dims=dims, config=_window, options=MatchingOptions(workers=workers))
        corrections = collect_stream_corrections(emitted=_decoder.decode(sheets=sheets))

    digest = _write_corrections(corrections=corrections, layout=DetectorLayout(dims=dims), out=out, binary=binary)
    report.show(text=f"flips={_decoder.flips_matched} corrected={sum(len(c) for c in corrections)} digest={digest}")


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run the CLI and map its failure to an exit code instead of raising.
    """
    command = typer.main.get_command(app)
    try:
        result = command.main(
            args=list(argv) if argv is not None else None, prog_name="tqc-bench", standalone_mode=False
        )
    except USAGE_ERRORS as exp:
        _log_failure(exp=exp)
        return EXIT_USAGE
    except DATA_ERRORS as exp:
        _log_failure(exp=exp)
        return EXIT_DATA
    except INVARIANT_ERRORS as exp:
        _log_failure(exp=exp)
        return EXIT_INVARIANT

    # click hands back the code of an Exit raised under standalone_mode=False
    return result if isinstance(result, int) else EXIT_OK


def _log_failure(exp: BaseException) -> None:
    message = exp.format_message() if isinstance(exp, click.ClickException) else str(exp)
    logging.getLogger("basic").error(separator(symbol_="!", val=type(exp).__name__))
    LOGGER.error(message or type(exp).__name__)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
