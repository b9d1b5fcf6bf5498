"""
Decode entry points and success verification.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field

from simple_logger.logger import get_logger

from libs.base_decoder import StageTimings
from libs.corrections import CorrectionSet, corrections_from_matching, pair_path
from libs.decoders.batch import BatchDecoder, BatchDecodeResult
from libs.decoders.stream import DecodeWindowConfig, StreamDecoder
from libs.lattice import AXES, CellClass, LatticeDims, QubitCoord, normal_axis, wrap_qubit
from libs.matching.components import MatchingOptions
from libs.noise import ErrorPattern, reduce_to_z
from libs.syndrome import DetectorSheet, SyndromeSet, syndrome_from_errors

LOGGER = get_logger(__name__)

__all__ = [
    "BatchDecodeResult",
    "CorrectionSet",
    "DecodeWindowConfig",
    "StageTimings",
    "VerifyResult",
    "collect_stream_corrections",
    "corrections_from_matching",
    "decode_batch",
    "decode_stream",
    "logical_plane",
    "pair_path",
    "verify",
]


def decode_batch(
    errors: ErrorPattern, dims: LatticeDims, options: MatchingOptions | None = None
) -> tuple[CorrectionSet, CorrectionSet]:
    """
    Decode a finite lattice volume.

    Returns:
        tuple[CorrectionSet, CorrectionSet]: primal and dual Z corrections
    """
    result = BatchDecoder(dims=dims, options=options).decode(errors=errors)
    return result.primal, result.dual


def decode_stream(
    sheets: Iterable[DetectorSheet],
    cfg: DecodeWindowConfig,
    dims: LatticeDims,
    options: MatchingOptions | None = None,
) -> Iterator[tuple[int, CorrectionSet]]:
    yield from StreamDecoder(dims=dims, config=cfg, options=options).decode(sheets=sheets)


def collect_stream_corrections(
    emitted: Iterable[tuple[int, CorrectionSet]],
) -> tuple[CorrectionSet, CorrectionSet]:
    """
    Fold streamed (t, corrections) records into one correction set per class.
    """
    qubits: dict[CellClass, list[QubitCoord]] = {CellClass.PRIMAL: [], CellClass.DUAL: []}
    for _, _corrections in emitted:
        qubits[_corrections.cell_class].extend(_corrections.qubits)

    return (
        CorrectionSet.from_toggles(cell_class=CellClass.PRIMAL, qubits=qubits[CellClass.PRIMAL]),
        CorrectionSet.from_toggles(cell_class=CellClass.DUAL, qubits=qubits[CellClass.DUAL]),
    )


@dataclass(frozen=True)
class VerifyResult:
    residual_syndrome_empty: bool
    residual: tuple[SyndromeSet, SyndromeSet]
    # None when no axis is periodic
    logical_failure: dict[CellClass, bool] | None
    failing_axes: dict[CellClass, tuple[int, ...]] = field(default_factory=dict)

    @property
    def any_logical_failure(self) -> bool:
        return bool(self.logical_failure) and any(self.logical_failure.values())  # type: ignore[union-attr]


def logical_plane(cell_class: CellClass) -> int:
    """
    Doubled coordinate of the test plane crossed by chains of one class: primal faces sit
    at odd normal coordinates, dual faces at even ones.
    """
    return 1 if cell_class is CellClass.PRIMAL else 0


def _plane_crossings(chain: Iterable[QubitCoord], axis: int, cell_class: CellClass) -> int:
    plane = logical_plane(cell_class=cell_class)
    return sum(1 for q in chain if normal_axis(q=q) == axis and q[axis] == plane)


def verify(
    errors: ErrorPattern, corrections: tuple[CorrectionSet, CorrectionSet], dims: LatticeDims
) -> VerifyResult:
    """
    Apply the corrections to the Z-reduced errors and check the result.

    The residual syndrome must vanish. On each periodic axis, a combined chain that crosses
    the test plane an odd number of times wraps the lattice and counts as a logical failure.
    """
    z_errors = dict(zip((CellClass.PRIMAL, CellClass.DUAL), reduce_to_z(pattern=errors, dims=dims)))
    periodic_axes = [_axis for _axis in AXES if dims.periodic(axis=_axis)]

    _residual: list[SyndromeSet] = []
    failing: dict[CellClass, tuple[int, ...]] = {}
    for _corrections in corrections:
        _class = _corrections.cell_class
        _combined = z_errors[_class] ^ frozenset(wrap_qubit(q=q, dims=dims) for q in _corrections.qubits)
        _residual.append(syndrome_from_errors(z_errors=_combined, dims=dims, cell_class=_class))
        failing[_class] = tuple(
            _axis
            for _axis in periodic_axes
            if _plane_crossings(chain=_combined, axis=_axis, cell_class=_class) % 2
        )

    empty = not any(_residual)
    if not empty:
        LOGGER.warning(f"Residual syndrome after correction: {[len(s) for s in _residual]} flips (primal, dual)")

    return VerifyResult(
        residual_syndrome_empty=empty,
        residual=tuple(sorted(_residual, key=lambda s: s.cell_class.offset)),  # type: ignore[arg-type]
        logical_failure={_class: bool(axes) for _class, axes in failing.items()} if periodic_axes else None,
        failing_axes=failing if periodic_axes else {},
    )
