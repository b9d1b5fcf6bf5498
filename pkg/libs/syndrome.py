"""
Syndrome extraction.

Two paths produce the same parity flips: directly from Z error locations, and
from a raw detector bit-stream through the six-term cell parity. The detector
grid maps site (i, j) of sheet T to the qubit at doubled coordinate
(i + origin_x, j + origin_y, T); empty sites (cell centers, sites outside the
lattice) always read 0.
"""

from __future__ import annotations

import functools
from collections import deque
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass

import numpy as np
from simple_logger.logger import get_logger

from exceptions.exceptions import LatticeParityError, StreamOrderError
from libs.lattice import (
    BoundaryMode,
    CellClass,
    CellCoord,
    LatticeDims,
    QubitCoord,
    contains_qubit,
    face_class_of,
    incident_cells,
    normal_axis,
    qubits_on_sheet,
    wrap_qubit,
)
from libs.noise import GAUGE_STREAM, MEASUREMENT_STREAM, sheet_rng

LOGGER = get_logger(__name__)

FIRST_SHEET: int = -1
NO_QUBIT: int = -1


@dataclass(frozen=True)
class SyndromeSet:
    cell_class: CellClass
    flips: frozenset[CellCoord]

    @classmethod
    def empty(cls, cell_class: CellClass) -> SyndromeSet:
        return cls(cell_class=cell_class, flips=frozenset())

    def ordered(self) -> list[CellCoord]:
        # flip emission order: t, then y, then x
        return sorted(self.flips, key=lambda cell: (cell.t, cell.y, cell.x))

    def __len__(self) -> int:
        return len(self.flips)

    def __bool__(self) -> bool:
        return bool(self.flips)

    def __xor__(self, other: SyndromeSet) -> SyndromeSet:
        return SyndromeSet(cell_class=self.cell_class, flips=self.flips ^ other.flips)


@dataclass(eq=False)
class DetectorSheet:
    t: int
    bits: np.ndarray

    def __post_init__(self) -> None:
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 2:
            raise ValueError(f"Detector sheet {self.t} must be 2D, got shape {self.bits.shape}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DetectorSheet):
            return NotImplemented
        return self.t == other.t and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash((self.t, self.bits.tobytes()))


@dataclass(frozen=True)
class DetectorLayout:
    """
    Detector grid geometry of a lattice.

    Open axes carry the outer face layers, so the grid starts at doubled coordinate -1
    and is 2*l + 2 sites wide; periodic axes start at 0 and are 2*l sites wide.
    """

    dims: LatticeDims

    @property
    def spatially_periodic(self) -> bool:
        return self.dims.boundary_mode is BoundaryMode.PERIODIC

    @property
    def origin(self) -> tuple[int, int]:
        return (0, 0) if self.spatially_periodic else (-1, -1)

    @property
    def shape(self) -> tuple[int, int]:
        pad = 0 if self.spatially_periodic else 2
        return self.dims.extent(axis=0) + pad, self.dims.extent(axis=1) + pad

    @property
    def width(self) -> int:
        return self.shape[0]

    @property
    def height(self) -> int:
        return self.shape[1]

    def site_of(self, q: tuple[int, int, int]) -> tuple[int, int]:
        _q = wrap_qubit(q=q, dims=self.dims)
        return _q.x - self.origin[0], _q.y - self.origin[1]

    def coord_at(self, i: int, j: int, t: int) -> tuple[int, int, int]:
        return i + self.origin[0], j + self.origin[1], t

    def qubit_at(self, i: int, j: int, t: int) -> QubitCoord | None:
        q = QubitCoord(*self.coord_at(i=i, j=j, t=t))
        return q if contains_qubit(q=q, dims=self.sheet_dims) else None

    def site_class(self, i: int, j: int, t: int) -> CellClass | None:
        q = self.qubit_at(i=i, j=j, t=t)
        return face_class_of(coord=q) if q is not None else None

    @functools.cached_property
    def sheet_dims(self) -> LatticeDims:
        # sheets are enumerated with an open t axis; periodic t is wrapped by copying sheets
        return self.dims.with_time_boundary(BoundaryMode.OPEN)

    def normal_axis_grid(self, t: int) -> np.ndarray:
        """
        Normal axis of the qubit at each site of sheet t, NO_QUBIT where the site holds none.
        """
        return _normal_axis_grid(layout=self, t=t)

    def qubit_mask(self, t: int) -> np.ndarray:
        return self.normal_axis_grid(t=t) != NO_QUBIT

    def cell_mask(self, t: int) -> np.ndarray:
        """
        Sites of sheet t that are centers of cells inside the lattice.
        """
        return _cell_mask(layout=self, t=t)


@functools.lru_cache(maxsize=1024)
def _normal_axis_grid(layout: DetectorLayout, t: int) -> np.ndarray:
    grid = np.full(layout.shape, NO_QUBIT, dtype=np.int8)
    for q in qubits_on_sheet(dims=layout.sheet_dims, t=t):
        grid[q.x - layout.origin[0], q.y - layout.origin[1]] = normal_axis(q=q)
    grid.setflags(write=False)
    return grid


@functools.lru_cache(maxsize=16)
def _cell_mask(layout: DetectorLayout, t: int) -> np.ndarray:
    mask = np.zeros(layout.shape, dtype=bool)
    if t < 0:
        return mask

    _class = CellClass.PRIMAL if t % 2 == 0 else CellClass.DUAL
    off = _class.offset
    xs = np.arange(off, off + layout.dims.extent(axis=0) - 1, 2) - layout.origin[0]
    ys = np.arange(off, off + layout.dims.extent(axis=1) - 1, 2) - layout.origin[1]
    mask[np.ix_(xs, ys)] = True
    mask.setflags(write=False)
    return mask


def syndrome_from_errors(z_errors: Iterable[QubitCoord], dims: LatticeDims, cell_class: CellClass) -> SyndromeSet:
    """
    Cells of one class whose six-face parity is odd under the given Z errors.

    Raises:
        LatticeParityError: an error sits on a face of the other class or outside the lattice
    """
    flips: set[CellCoord] = set()
    for q in z_errors:
        if not contains_qubit(q=wrap_qubit(q=q, dims=dims), dims=dims, cell_class=cell_class):
            raise LatticeParityError(coord=tuple(q), expected=f"{cell_class} face inside {dims}")

        for cell in incident_cells(q=q, dims=dims, cell_class=cell_class):
            flips ^= {cell}

    return SyndromeSet(cell_class=cell_class, flips=frozenset(flips))


def compute_parity(window: Sequence[DetectorSheet], i: int, j: int, wrap: bool = False) -> int:
    """
    Six-term parity of the cell centered at (i, j) of the middle sheet.

    Sums s[i, j] of the sheets before and after with the four in-sheet neighbours
    (i-1, j), (i, j-1), (i, j+1), (i+1, j), mod 2. Off-grid neighbours wrap when
    wrap is set and read 0 otherwise.
    """
    if len(window) != 3:
        raise ValueError(f"Parity window needs 3 sheets, got {len(window)}")

    _before, _sheet, _after = window
    width, height = _sheet.bits.shape

    def _bit(ii: int, jj: int) -> int:
        if wrap:
            return int(_sheet.bits[ii % width, jj % height])
        if 0 <= ii < width and 0 <= jj < height:
            return int(_sheet.bits[ii, jj])
        return 0

    terms = (
        int(_before.bits[i, j]),
        _bit(i - 1, j),
        _bit(i, j - 1),
        _bit(i, j + 1),
        _bit(i + 1, j),
        int(_after.bits[i, j]),
    )
    return sum(terms) % 2


def _shift(bits: np.ndarray, axis: int, step: int, wrap: bool) -> np.ndarray:
    """
    out[i] = bits[i - step] along axis; vacated sites read 0 unless wrap.
    """
    if wrap:
        return np.roll(bits, step, axis=axis)

    _out = np.zeros_like(bits)
    src = [slice(None), slice(None)]
    dst = [slice(None), slice(None)]
    if step > 0:
        src[axis], dst[axis] = slice(None, -step), slice(step, None)
    else:
        src[axis], dst[axis] = slice(-step, None), slice(None, step)
    _out[tuple(dst)] = bits[tuple(src)]
    return _out


def _in_sheet_sum(bits: np.ndarray, axis: int, wrap: bool) -> np.ndarray:
    return _shift(bits=bits, axis=axis, step=1, wrap=wrap) ^ _shift(bits=bits, axis=axis, step=-1, wrap=wrap)


def parity_grid(window: Sequence[DetectorSheet], wrap: bool) -> np.ndarray:
    """
    compute_parity evaluated at every site of the middle sheet.
    """
    before, _sheet, after = window
    return (
        before.bits
        ^ after.bits
        ^ _in_sheet_sum(bits=_sheet.bits, axis=0, wrap=wrap)
        ^ _in_sheet_sum(bits=_sheet.bits, axis=1, wrap=wrap)
    )


def _gauge_bits(layout: DetectorLayout, seed: int, t: int) -> np.ndarray:
    return sheet_rng(seed=seed, t=t, stream=GAUGE_STREAM).integers(0, 2, size=layout.shape, dtype=np.uint8)


def _error_free_sheet(
    layout: DetectorLayout, gauges: dict[int, np.ndarray], t: int, t_before: int, t_after: int
) -> np.ndarray:
    """
    Raw bits of an error-free sheet: every qubit reads the XOR of a random gauge
    over its four bonded neighbours. Each cell edge is bonded to exactly two of the
    cell's faces, so every cell parity cancels.
    """
    wrap = layout.spatially_periodic
    zeros = np.zeros(layout.shape, dtype=np.uint8)
    g = gauges[t]
    gx = _in_sheet_sum(bits=g, axis=0, wrap=wrap)
    gy = _in_sheet_sum(bits=g, axis=1, wrap=wrap)
    gt = gauges.get(t_before, zeros) ^ gauges.get(t_after, zeros)

    normals = layout.normal_axis_grid(t=t)
    _bits = np.where(normals == 2, gx ^ gy, 0)
    _bits = np.where(normals == 0, gy ^ gt, _bits)
    _bits = np.where(normals == 1, gx ^ gt, _bits)
    return _bits.astype(np.uint8)


def iter_detector_sheets(
    z_errors: Iterable[QubitCoord], dims: LatticeDims, seed: int, measurement_error: float = 0.0
) -> Iterator[DetectorSheet]:
    """
    Synthesize the raw detector stream of a lattice sheet by sheet.

    Sheets run from -1 to 2*lt. On a periodic t axis the two end sheets are copies
    of sheets 2*lt - 1 and 0, so every cell layer sees its full window.

    Args:
        z_errors (Iterable[QubitCoord]): Z errors of both classes
        dims (LatticeDims): lattice dimensions
        seed (int): 64-bit seed for the gauge and measurement substreams
        measurement_error (float): probability of flipping each raw qubit bit

    Yields:
        DetectorSheet: sheets in increasing t
    """
    layout = DetectorLayout(dims=dims)
    ext_t = dims.extent(axis=2)
    periodic_t = dims.periodic(axis=2)

    errors_by_sheet: dict[int, list[tuple[int, int]]] = {}
    for q in z_errors:
        wrapped = wrap_qubit(q=q, dims=dims)
        errors_by_sheet.setdefault(wrapped.t, []).append(layout.site_of(q=wrapped))

    sheet_ts = range(0, ext_t) if periodic_t else range(FIRST_SHEET, ext_t + 1)
    gauges = {_t: _gauge_bits(layout=layout, seed=seed, t=_t) for _t in sheet_ts}

    def _sheet(t: int) -> DetectorSheet:
        if periodic_t:
            before, after = (t - 1) % ext_t, (t + 1) % ext_t
        else:
            before, after = t - 1, t + 1

        bits = _error_free_sheet(layout=layout, gauges=gauges, t=t, t_before=before, t_after=after)
        for i, j in errors_by_sheet.get(t, []):
            bits[i, j] ^= 1

        if measurement_error > 0.0:
            bits ^= _misfire_mask(layout=layout, seed=seed, t=t, measurement_error=measurement_error).astype(np.uint8)

        return DetectorSheet(t=t, bits=bits)

    if not periodic_t:
        for _t in sheet_ts:
            yield _sheet(t=_t)
        return

    last = _sheet(t=ext_t - 1)
    first = _sheet(t=0)
    yield DetectorSheet(t=FIRST_SHEET, bits=last.bits.copy())
    yield first
    for _t in range(1, ext_t - 1):
        yield _sheet(t=_t)
    if ext_t > 1:
        yield last
    yield DetectorSheet(t=ext_t, bits=first.bits.copy())


def _misfire_mask(layout: DetectorLayout, seed: int, t: int, measurement_error: float) -> np.ndarray:
    draws = sheet_rng(seed=seed, t=t, stream=MEASUREMENT_STREAM).random(layout.shape)
    return (draws < measurement_error) & layout.qubit_mask(t=t)


def measurement_misfires(dims: LatticeDims, seed: int, measurement_error: float) -> frozenset[QubitCoord]:
    """
    Qubits whose raw bit a synthesized stream flips with the same seed. A misfire reads exactly
    like a Z error on that qubit, so these join the errors when checking a decoded stream.
    """
    if measurement_error <= 0.0:
        return frozenset()

    layout = DetectorLayout(dims=dims)
    ext_t = dims.extent(axis=2)
    sheet_ts = range(0, ext_t) if dims.periodic(axis=2) else range(FIRST_SHEET, ext_t + 1)
    qubits: set[QubitCoord] = set()
    for t in sheet_ts:
        mask = _misfire_mask(layout=layout, seed=seed, t=t, measurement_error=measurement_error)
        qubits.update(QubitCoord(*layout.coord_at(i=int(i), j=int(j), t=t)) for i, j in np.argwhere(mask))
    return frozenset(qubits)


def synthesize_detector_stream(
    z_errors: Iterable[QubitCoord], dims: LatticeDims, seed: int, measurement_error: float = 0.0
) -> list[DetectorSheet]:
    return list(iter_detector_sheets(z_errors=z_errors, dims=dims, seed=seed, measurement_error=measurement_error))


class ParityFilter:
    """
    Streaming parity stage: keeps the last three sheets and, when sheet T+1 arrives,
    emits the odd-parity cells of layer T ordered by (y, x). All other data is dropped.
    """

    def __init__(self, dims: LatticeDims, first_t: int = FIRST_SHEET) -> None:
        self.dims = dims
        self.layout = DetectorLayout(dims=dims)
        self.expected_t = first_t
        self.position = 0
        self.raw_bits = 0
        self.flips_emitted = 0
        self._window: deque[DetectorSheet] = deque(maxlen=3)

    def push(self, sheet: DetectorSheet) -> tuple[int, list[CellCoord]] | None:
        """
        Feed the next sheet.

        Returns:
            tuple[int, list[CellCoord]] | None: the completed layer and its flips, None until
                three sheets are buffered

        Raises:
            StreamOrderError: the sheet is not the next one in t
        """
        if sheet.t != self.expected_t:
            raise StreamOrderError(expected_t=self.expected_t, got_t=sheet.t, position=self.position)
        if sheet.bits.shape != self.layout.shape:
            raise ValueError(f"Sheet {sheet.t} has shape {sheet.bits.shape}, layout expects {self.layout.shape}")

        self.expected_t += 1
        self.position += 1
        self.raw_bits += int(self.layout.qubit_mask(t=sheet.t).sum())
        self._window.append(sheet)
        if len(self._window) < 3:
            return None

        _layer = self._window[1].t
        odd = parity_grid(window=self._window, wrap=self.layout.spatially_periodic).astype(bool)
        odd &= self.layout.cell_mask(t=_layer)
        # argwhere on the transpose yields (j, i) pairs sorted by j, then i
        _flips = [
            CellCoord(*self.layout.coord_at(i=int(_i), j=int(_j), t=_layer)) for _j, _i in np.argwhere(odd.T)
        ]
        self.flips_emitted += len(_flips)
        return _layer, _flips

    @property
    def reduction_ratio(self) -> float:
        """
        Raw qubit bits read per retained flip.
        """
        return self.raw_bits / max(self.flips_emitted, 1)


def parity_filter(sheets: Iterable[DetectorSheet], dims: LatticeDims) -> Iterator[CellCoord]:
    _filter = ParityFilter(dims=dims)
    for _sheet in sheets:
        completed = _filter.push(sheet=_sheet)
        if completed:
            yield from completed[1]


def syndromes_from_stream(sheets: Iterable[DetectorSheet], dims: LatticeDims) -> tuple[SyndromeSet, SyndromeSet]:
    """
    Run the parity filter over a whole stream and split the flips by class.
    """
    _flips: dict[CellClass, set[CellCoord]] = {CellClass.PRIMAL: set(), CellClass.DUAL: set()}
    for cell in parity_filter(sheets=sheets, dims=dims):
        _flips[cell.cell_class].add(cell)

    return (
        SyndromeSet(cell_class=CellClass.PRIMAL, flips=frozenset(_flips[CellClass.PRIMAL])),
        SyndromeSet(cell_class=CellClass.DUAL, flips=frozenset(_flips[CellClass.DUAL])),
    )
