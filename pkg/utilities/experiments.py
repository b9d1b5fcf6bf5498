from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from simple_logger.logger import get_logger

from exceptions.exceptions import ExperimentConfigError, InvariantViolationError
from libs.corrections import CorrectionSet
from libs.decoders.batch import BatchDecoder
from libs.decoders.stream import DecodeWindowConfig, StreamDecoder
from libs.lattice import BoundaryMode, CellClass, LatticeDims
from libs.matching.components import MatchingOptions
from libs.noise import SEED_MASK, TRIAL_STREAM, ErrorPattern, NoiseChannel, Pauli, reduce_to_z, sample_errors
from libs.pipeline import collect_stream_corrections, verify
from libs.syndrome import iter_detector_sheets, measurement_misfires
from utilities.config import ExperimentConfig
from utilities.naming import generate_run_id
from utilities.statistics import wilson_interval

LOGGER = get_logger(__name__)

OUTCOMES: tuple[str, str, str] = ("primal", "dual", "any")
EXPERIMENT_COLUMNS: tuple[str, ...] = (
    "run_id",
    "mode",
    "lx",
    "ly",
    "lt",
    "boundary",
    "p_x",
    "p_z",
    "p_xz",
    "measurement_error",
    "seed",
    "trials",
    "outcome",
    "failures",
    "rate",
    "ci_low",
    "ci_high",
    "mean_flips",
)


def trial_seed(seed: int, index: int) -> int:
    """
    64-bit seed of trial `index`, independent of how trials are spread over workers.
    """
    seq = np.random.SeedSequence(entropy=seed & SEED_MASK, spawn_key=(TRIAL_STREAM, index))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class TrialPlan:
    dims: LatticeDims
    channel: NoiseChannel
    mode: str
    seed: int
    window: DecodeWindowConfig
    options: MatchingOptions
    measurement_error: float = 0.0

    @classmethod
    def from_config(cls, cfg: ExperimentConfig) -> TrialPlan:
        """
        Raises:
            ExperimentConfigError: the spatial boundary is not periodic or the window is invalid
            InvalidNoiseChannelError: the error probabilities do not form a channel
        """
        dims = cfg.dims
        if dims.boundary_mode is not BoundaryMode.PERIODIC:
            raise ExperimentConfigError(f"Logical experiments need a periodic lattice, got boundary={cfg.boundary}")

        return cls(
            # streamed trials never wrap in t
            dims=dims.with_time_boundary(BoundaryMode.OPEN) if cfg.mode == "stream" else dims,
            channel=cfg.channel,
            mode=cfg.mode,
            seed=cfg.seed,
            window=cfg.window_config,
            options=cfg.matching_options,
            measurement_error=cfg.measurement_error,
        )


@dataclass
class TrialTally:
    trials: int = 0
    flips: int = 0
    failures: dict[str, int] = field(default_factory=lambda: dict.fromkeys(OUTCOMES, 0))

    def merge(self, other: TrialTally) -> None:
        self.trials += other.trials
        self.flips += other.flips
        for key, value in other.failures.items():
            self.failures[key] += value


@dataclass
class ExperimentSummary:
    run_id: str
    config: ExperimentConfig
    tally: TrialTally
    seconds: float

    def rate(self, outcome: str) -> float:
        return self.tally.failures[outcome] / self.tally.trials

    def interval(self, outcome: str) -> tuple[float, float]:
        return wilson_interval(successes=self.tally.failures[outcome], trials=self.tally.trials)

    def rows(self) -> list[dict[str, Any]]:
        cfg = self.config
        _rows = []
        for _outcome in OUTCOMES:
            low, high = self.interval(outcome=_outcome)
            _rows.append({
                "run_id": self.run_id,
                "mode": cfg.mode,
                "lx": cfg.lx,
                "ly": cfg.ly,
                "lt": cfg.lt,
                "boundary": cfg.boundary,
                "p_x": cfg.p_x,
                "p_z": cfg.p_z,
                "p_xz": cfg.p_xz,
                "measurement_error": cfg.measurement_error,
                "seed": cfg.seed,
                "trials": self.tally.trials,
                "outcome": _outcome,
                "failures": self.tally.failures[_outcome],
                "rate": self.rate(outcome=_outcome),
                "ci_low": low,
                "ci_high": high,
                "mean_flips": self.tally.flips / self.tally.trials,
            })
        return _rows


def _decode_trial(
    plan: TrialPlan, errors: ErrorPattern, seed: int
) -> tuple[tuple[CorrectionSet, CorrectionSet], ErrorPattern, int]:
    """
    Decode one sampled pattern. Returns the corrections, the errors they must cancel
    (measurement misfires included) and the number of flips matched.
    """
    if plan.mode == "batch" and plan.measurement_error == 0.0:
        result = BatchDecoder(dims=plan.dims, options=plan.options).decode(errors=errors)
        return result.corrections, errors, result.flips_matched

    primal_z, dual_z = reduce_to_z(pattern=errors, dims=plan.dims)
    sheets = iter_detector_sheets(
        z_errors=primal_z | dual_z, dims=plan.dims, seed=seed, measurement_error=plan.measurement_error
    )
    checked = ErrorPattern(entries=dict(errors.entries))
    for q in measurement_misfires(dims=plan.dims, seed=seed, measurement_error=plan.measurement_error):
        checked.add(q=q, pauli=Pauli.Z)

    if plan.mode == "batch":
        result = BatchDecoder(dims=plan.dims, options=plan.options).decode_sheets(sheets=sheets)
        return result.corrections, checked, result.flips_matched

    decoder = StreamDecoder(dims=plan.dims, config=plan.window, options=plan.options)
    _corrections = collect_stream_corrections(emitted=decoder.decode(sheets=sheets))
    return _corrections, checked, decoder.flips_matched


def run_trial(plan: TrialPlan, index: int) -> TrialTally:
    """
    Sample, decode and verify one trial.

    Raises:
        InvariantViolationError: the corrections left a residual syndrome
    """
    _seed = trial_seed(seed=plan.seed, index=index)
    errors = sample_errors(dims=plan.dims, channel=plan.channel, seed=_seed)
    _corrections, checked, flips = _decode_trial(plan=plan, errors=errors, seed=_seed)

    verdict = verify(errors=checked, corrections=_corrections, dims=plan.dims)
    if not verdict.residual_syndrome_empty:
        raise InvariantViolationError(f"Trial {index} (seed {_seed}) left a residual syndrome after correction")

    failed = verdict.logical_failure or {}
    tally = TrialTally(trials=1, flips=flips)
    tally.failures["primal"] = int(failed.get(CellClass.PRIMAL, False))
    tally.failures["dual"] = int(failed.get(CellClass.DUAL, False))
    tally.failures["any"] = int(verdict.any_logical_failure)
    return tally


def _run_chunk(plan: TrialPlan, indices: range) -> TrialTally:
    tally = TrialTally()
    for index in indices:
        tally.merge(other=run_trial(plan=plan, index=index))
    return tally


def run_logical_experiment(cfg: ExperimentConfig, run_id: str | None = None) -> ExperimentSummary:
    """
    Monte-Carlo logical failure rates of one configuration.

    Trial k always uses trial_seed(cfg.seed, k), so the counts depend on the master seed only,
    never on the worker count.

    Raises:
        ExperimentConfigError: invalid configuration, before any trial runs
        InvariantViolationError: a trial left a residual syndrome
    """
    plan = TrialPlan.from_config(cfg=cfg)
    _run_id = run_id or generate_run_id(prefix="simulate")

    workers = min(cfg.workers, cfg.trials)
    bounds = np.linspace(0, cfg.trials, workers + 1).astype(int)
    chunks = [range(int(lo), int(hi)) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]

    LOGGER.info(
        f"[{_run_id}] {cfg.trials} {cfg.mode} trials on {plan.dims} with p_x={cfg.p_x} p_z={cfg.p_z} "
        f"p_xz={cfg.p_xz}, {len(chunks)} worker(s)"
    )
    start = time.perf_counter()
    tally = TrialTally()
    if len(chunks) == 1:
        tally.merge(other=_run_chunk(plan=plan, indices=chunks[0]))
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as executor:
            futures = [executor.submit(_run_chunk, plan=plan, indices=chunk) for chunk in chunks]
            for future in as_completed(futures):
                tally.merge(other=future.result())

    summary = ExperimentSummary(run_id=_run_id, config=cfg, tally=tally, seconds=time.perf_counter() - start)
    LOGGER.info(
        f"[{_run_id}] failures primal={tally.failures['primal']} dual={tally.failures['dual']} "
        f"any={tally.failures['any']} of {tally.trials} trials in {summary.seconds:.2f}s"
    )
    return summary
