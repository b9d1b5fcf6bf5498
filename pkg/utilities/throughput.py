"""
Decoder throughput study: median decode time per lattice volume against the number of
qubits in one cross-section, one curve per error rate.

Volumes and their detector streams are generated before the clock starts, so the timings
cover the four processing stages only.
"""

from __future__ import annotations

import math
import time
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field

import humanfriendly
import numpy as np
from simple_logger.logger import get_logger

from exceptions.exceptions import ExperimentConfigError
from libs.base_decoder import StageTimings
from libs.decoders.batch import BatchDecoder, BatchDecodeResult
from libs.lattice import BoundaryMode, CellClass, LatticeDims, all_cells, qubits_on_sheet
from libs.matching.components import MatchingOptions
from libs.noise import NoiseChannel, reduce_to_z, sample_errors
from libs.syndrome import DetectorLayout, DetectorSheet, synthesize_detector_stream
from utilities.experiments import trial_seed
from utilities.naming import generate_run_id

LOGGER = get_logger(__name__)

MIN_REPEATS: int = 5
# decodes faster than this are repeated back to back and averaged
MIN_TIMED_SECONDS: float = 1e-3
DEFAULT_SHEET_PERIOD: float = 10e-9
# flips joined below this weighted distance are matched together
DEFAULT_BENCH_CUTOFF: int = 4

BENCH_COLUMNS: tuple[str, ...] = (
    "run_id",
    "lx",
    "ly",
    "lt",
    "boundary",
    "qubit_count",
    "p",
    "repeats",
    "batch",
    "wall_time",
    "wall_time_min",
    "wall_time_max",
    "flips_matched",
    "total_weight",
    "flip_density",
    "reduction_ratio",
    "parity_filter",
    "graph_generation",
    "matching",
    "output_processing",
    "seconds_per_sheet",
    "realtime_ratio",
)


@dataclass(frozen=True)
class BenchConfig:
    sizes: tuple[int, ...]
    ps: tuple[float, ...]
    lt: int = 2
    boundary: BoundaryMode = BoundaryMode.OPEN
    repeats: int = MIN_REPEATS
    seed: int = 0
    sheet_period: float = DEFAULT_SHEET_PERIOD
    component_cutoff: int | None = DEFAULT_BENCH_CUTOFF
    sparsify_k: int | None = None

    def __post_init__(self) -> None:
        if not self.sizes or not self.ps:
            raise ExperimentConfigError("Throughput sweep needs at least one size and one error rate")
        if any(_size < 1 for _size in self.sizes):
            raise ExperimentConfigError(f"Sweep sizes must be positive, got {self.sizes}")
        if any(not 0.0 <= p <= 0.5 for p in self.ps):
            raise ExperimentConfigError(f"Sweep error rates must lie in [0, 0.5], got {self.ps}")
        if self.repeats < MIN_REPEATS:
            raise ExperimentConfigError(f"At least {MIN_REPEATS} repeats are needed for a median, got {self.repeats}")
        if self.sheet_period <= 0:
            raise ExperimentConfigError(f"Sheet period must be positive, got {self.sheet_period}")

    @property
    def options(self) -> MatchingOptions:
        # timing runs on a single worker
        return MatchingOptions(component_cutoff=self.component_cutoff, sparsify_k=self.sparsify_k, workers=1)


@dataclass
class BenchRecord:
    run_id: str
    lx: int
    ly: int
    lt: int
    boundary: str
    qubit_count: int
    p: float
    repeats: int
    batch: int
    wall_time: float
    wall_time_min: float
    wall_time_max: float
    flips_matched: int
    total_weight: int
    flip_density: float
    reduction_ratio: float
    stages: StageTimings = field(default_factory=StageTimings)
    seconds_per_sheet: float = 0.0
    realtime_ratio: float = 0.0

    def __post_init__(self) -> None:
        if self.wall_time <= 0:
            raise ValueError(f"Bench wall time must be positive, got {self.wall_time}")

    def row(self) -> dict[str, object]:
        _row = {key: value for key, value in asdict(self).items() if key != "stages"}
        _row.update(self.stages.as_dict())
        return {column: _row[column] for column in BENCH_COLUMNS}


def cross_section_qubits(dims: LatticeDims) -> int:
    """
    Qubits of both classes in one cell layer (sheets 0 and 1).
    """
    sheet_dims = DetectorLayout(dims=dims).sheet_dims
    return len(qubits_on_sheet(dims=sheet_dims, t=0)) + len(qubits_on_sheet(dims=sheet_dims, t=1))


def _timed_decode(
    dims: LatticeDims, options: MatchingOptions, sheets: Sequence[DetectorSheet]
) -> tuple[float, BatchDecodeResult]:
    decoder = BatchDecoder(dims=dims, options=options)
    start = time.perf_counter()
    result = decoder.decode_sheets(sheets=sheets)
    return time.perf_counter() - start, result


def bench_point(cfg: BenchConfig, size: int, p: float, run_id: str) -> BenchRecord:
    dims = LatticeDims(lx=size, ly=size, lt=cfg.lt, boundary_mode=cfg.boundary)
    seed = trial_seed(seed=cfg.seed, index=size)
    errors = sample_errors(dims=dims, channel=NoiseChannel.from_p(p=p), seed=seed)
    primal_z, dual_z = reduce_to_z(pattern=errors, dims=dims)
    sheets = synthesize_detector_stream(z_errors=primal_z | dual_z, dims=dims, seed=seed)

    single, result = _timed_decode(dims=dims, options=cfg.options, sheets=sheets)
    batch = 1
    if single < MIN_TIMED_SECONDS:
        batch = math.ceil(MIN_TIMED_SECONDS / max(single, 1e-9))
        LOGGER.warning(
            f"Decode of L={size} p={p} took {humanfriendly.format_timespan(single, detailed=True)}, "
            f"below timer resolution; timing batches of {batch}"
        )

    times: list[float] = []
    stages = StageTimings()
    for _ in range(cfg.repeats):
        elapsed = 0.0
        for _ in range(batch):
            seconds, result = _timed_decode(dims=dims, options=cfg.options, sheets=sheets)
            elapsed += seconds
            stages = stages + result.timings
        times.append(elapsed / batch)

    runs = cfg.repeats * batch
    per_volume = StageTimings(**{key: value / runs for key, value in stages.as_dict().items()})
    wall = float(np.median(times))
    cells = sum(len(all_cells(dims=dims, cell_class=_class)) for _class in (CellClass.PRIMAL, CellClass.DUAL))
    per_sheet = wall / len(sheets)

    record = BenchRecord(
        run_id=run_id,
        lx=size,
        ly=size,
        lt=cfg.lt,
        boundary=str(cfg.boundary),
        qubit_count=cross_section_qubits(dims=dims),
        p=p,
        repeats=cfg.repeats,
        batch=batch,
        wall_time=wall,
        wall_time_min=min(times),
        wall_time_max=max(times),
        flips_matched=result.flips_matched,
        total_weight=result.total_weight,
        flip_density=result.flips_matched / cells,
        reduction_ratio=result.reduction_ratio,
        stages=per_volume,
        seconds_per_sheet=per_sheet,
        realtime_ratio=per_sheet / cfg.sheet_period,
    )
    LOGGER.info(
        f"[{run_id}] L={size} ({record.qubit_count} qubits) p={p}: median "
        f"{humanfriendly.format_timespan(wall, detailed=True)}, {record.flips_matched} flips, "
        f"realtime ratio {record.realtime_ratio:.3g}"
    )
    return record


def run_throughput_bench(cfg: BenchConfig, run_id: str | None = None) -> list[BenchRecord]:
    """
    Sweep sizes x error rates. Records come back sorted by (qubit_count, p).

    Raises:
        ExperimentConfigError: empty sweep lists or invalid settings (checked by BenchConfig)
    """
    _run_id = run_id or generate_run_id(prefix="bench")
    LOGGER.info(f"[{_run_id}] throughput sweep over L={list(cfg.sizes)} and p={list(cfg.ps)}")
    records = [bench_point(cfg=cfg, size=size, p=_p, run_id=_run_id) for size in cfg.sizes for _p in cfg.ps]
    return sorted(records, key=lambda r: (r.qubit_count, r.p))
