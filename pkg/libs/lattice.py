"""
Geometry of the 3D topological cluster lattice in doubled coordinates.

Primal cell centers sit on all-even coordinates, dual cell centers on all-odd
coordinates. Qubits sit on mixed-parity sites: a site with exactly one odd
coordinate is a primal face (and a dual edge), a site with exactly two odd
coordinates is a dual face (and a primal edge).
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, replace
from itertools import product
from typing import NamedTuple

from exceptions.exceptions import CellClassMismatchError, InvalidLatticeDimsError, LatticeParityError

AXES: tuple[int, int, int] = (0, 1, 2)
AXIS_NAMES: tuple[str, str, str] = ("x", "y", "t")

# (-x, +x, -y, +y, -t, +t)
FACE_OFFSETS: tuple[tuple[int, int, int], ...] = (
    (-1, 0, 0),
    (1, 0, 0),
    (0, -1, 0),
    (0, 1, 0),
    (0, 0, -1),
    (0, 0, 1),
)


class CellClass(enum.StrEnum):
    PRIMAL = "primal"
    DUAL = "dual"

    @property
    def opposite(self) -> CellClass:
        return CellClass.DUAL if self is CellClass.PRIMAL else CellClass.PRIMAL

    @property
    def offset(self) -> int:
        # lowest cell-center coordinate along any axis
        return 0 if self is CellClass.PRIMAL else 1


class BoundaryMode(enum.StrEnum):
    PERIODIC = "periodic"
    OPEN = "open"


@dataclass(frozen=True)
class LatticeDims:
    lx: int
    ly: int
    lt: int
    boundary_mode: BoundaryMode = BoundaryMode.PERIODIC
    # None follows boundary_mode; streams always read t as open at the leading edge
    time_boundary: BoundaryMode | None = None

    def __post_init__(self) -> None:
        for name in ("lx", "ly", "lt"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InvalidLatticeDimsError(f"{name} must be a positive integer, got {value!r}")

        object.__setattr__(self, "boundary_mode", BoundaryMode(self.boundary_mode))
        if self.time_boundary is not None:
            object.__setattr__(self, "time_boundary", BoundaryMode(self.time_boundary))

    @property
    def lengths(self) -> tuple[int, int, int]:
        return self.lx, self.ly, self.lt

    @property
    def modes(self) -> tuple[BoundaryMode, BoundaryMode, BoundaryMode]:
        return self.boundary_mode, self.boundary_mode, self.time_boundary or self.boundary_mode

    def extent(self, axis: int) -> int:
        return 2 * self.lengths[axis]

    def periodic(self, axis: int) -> bool:
        return self.modes[axis] is BoundaryMode.PERIODIC

    @property
    def fully_periodic(self) -> bool:
        return all(self.periodic(axis=axis) for axis in AXES)

    def with_time_boundary(self, mode: BoundaryMode) -> LatticeDims:
        return replace(self, time_boundary=mode)


class CellCoord(NamedTuple):
    x: int
    y: int
    t: int

    @property
    def cell_class(self) -> CellClass:
        _class = cell_class_of(coord=self)
        if _class is None:
            raise LatticeParityError(coord=tuple(self), expected="cell center")
        return _class


class QubitCoord(NamedTuple):
    x: int
    y: int
    t: int

    @property
    def face_class(self) -> CellClass:
        _class = face_class_of(coord=self)
        if _class is None:
            raise LatticeParityError(coord=tuple(self), expected="qubit")
        return _class


class BoundaryStep(NamedTuple):
    distance: int
    axis: int
    direction: int


def cell_class_of(coord: tuple[int, int, int]) -> CellClass | None:
    odd = sum(v & 1 for v in coord)
    if odd == 0:
        return CellClass.PRIMAL
    if odd == 3:
        return CellClass.DUAL
    return None


def face_class_of(coord: tuple[int, int, int]) -> CellClass | None:
    odd = sum(v & 1 for v in coord)
    if odd == 1:
        return CellClass.PRIMAL
    if odd == 2:
        return CellClass.DUAL
    return None


def normal_axis(q: tuple[int, int, int]) -> int:
    """
    Axis along which the two cells sharing face q sit.

    For a primal face it is the single odd coordinate, for a dual face the single even one.
    """
    _class = face_class_of(coord=q)
    if _class is None:
        raise LatticeParityError(coord=tuple(q), expected="qubit")

    wanted = 1 if _class is CellClass.PRIMAL else 0
    return next(axis for axis in AXES if q[axis] & 1 == wanted)


def make_cell(x: int, y: int, t: int, cell_class: CellClass) -> CellCoord:
    _cell = CellCoord(x=x, y=y, t=t)
    if cell_class_of(coord=_cell) is not cell_class:
        raise LatticeParityError(coord=tuple(_cell), expected=f"{cell_class} cell center")
    return _cell


def wrap_cell(cell: tuple[int, int, int], dims: LatticeDims) -> CellCoord:
    return CellCoord(*_wrap(coord=cell, dims=dims))


def wrap_qubit(q: tuple[int, int, int], dims: LatticeDims) -> QubitCoord:
    return QubitCoord(*_wrap(coord=q, dims=dims))


def _wrap(coord: tuple[int, int, int], dims: LatticeDims) -> tuple[int, int, int]:
    return tuple(  # type: ignore[return-value]
        v % dims.extent(axis=axis) if dims.periodic(axis=axis) else v for axis, v in enumerate(coord)
    )


def contains_cell(cell: tuple[int, int, int], dims: LatticeDims) -> bool:
    _class = cell_class_of(coord=cell)
    if _class is None:
        return False

    for axis, v in enumerate(cell):
        ext = dims.extent(axis=axis)
        if dims.periodic(axis=axis):
            if not 0 <= v < ext:
                return False
        elif not _class.offset <= v <= _class.offset + ext - 2:
            return False

    return True


def contains_qubit(q: tuple[int, int, int], dims: LatticeDims, cell_class: CellClass | None = None) -> bool:
    _class = face_class_of(coord=q)
    if _class is None or (cell_class is not None and _class is not cell_class):
        return False

    normal = normal_axis(q=q)
    lo = _class.offset
    for axis, v in enumerate(q):
        ext = dims.extent(axis=axis)
        if dims.periodic(axis=axis):
            if not 0 <= v < ext:
                return False
        elif axis == normal:
            if not lo - 1 <= v <= lo + ext - 1:
                return False
        elif not lo <= v <= lo + ext - 2:
            return False

    return True


def all_cells(dims: LatticeDims, cell_class: CellClass) -> list[CellCoord]:
    """
    All cell centers of one class, ordered lexicographically by (t, y, x).
    """
    off = cell_class.offset
    xs, ys, ts = (range(off, off + dims.extent(axis=axis) - 1, 2) for axis in AXES)
    return [CellCoord(x=_x, y=_y, t=_t) for _t, _y, _x in product(ts, ys, xs)]


def sheet_range(dims: LatticeDims) -> range:
    """
    Sheet indices (doubled t) holding qubits of a batch lattice.

    Periodic t wraps at 2*lt; open t carries the outer face layers at -1 and 2*lt.
    """
    if dims.periodic(axis=2):
        return range(0, dims.extent(axis=2))
    return range(-1, dims.extent(axis=2) + 1)


def _axis_values(dims: LatticeDims, axis: int, cell_class: CellClass, is_normal: bool) -> range:
    ext = dims.extent(axis=axis)
    # primal: normal axis odd, others even; dual: normal axis even, others odd
    parity = (1 if is_normal else 0) if cell_class is CellClass.PRIMAL else (0 if is_normal else 1)
    if dims.periodic(axis=axis):
        return range(parity, ext, 2)

    lo = cell_class.offset
    if is_normal:
        return range(lo - 1, lo + ext, 2)
    return range(lo, lo + ext - 1, 2)


@functools.lru_cache(maxsize=4096)
def qubits_on_sheet(dims: LatticeDims, t: int, cell_class: CellClass | None = None) -> tuple[QubitCoord, ...]:
    """
    Qubits of the lattice lying on sheet t, ordered by (y, x).

    Args:
        dims (LatticeDims): lattice dimensions
        t (int): doubled t coordinate of the sheet
        cell_class (CellClass | None): restrict to faces of one class, both classes when None

    Returns:
        tuple[QubitCoord, ...]: qubits of the sheet
    """
    _classes = (cell_class,) if cell_class is not None else (CellClass.PRIMAL, CellClass.DUAL)
    _qubits: list[QubitCoord] = []

    for _class in _classes:
        for normal in AXES:
            ts = _axis_values(dims=dims, axis=2, cell_class=_class, is_normal=normal == 2)
            if t not in ts:
                continue

            xs = _axis_values(dims=dims, axis=0, cell_class=_class, is_normal=normal == 0)
            ys = _axis_values(dims=dims, axis=1, cell_class=_class, is_normal=normal == 1)
            _qubits.extend(QubitCoord(x=_x, y=_y, t=t) for _y, _x in product(ys, xs))

    return tuple(sorted(_qubits, key=lambda q: (q.y, q.x)))


@functools.lru_cache(maxsize=256)
def all_qubits(dims: LatticeDims, cell_class: CellClass | None = None) -> tuple[QubitCoord, ...]:
    return tuple(
        q for t in sheet_range(dims=dims) for q in qubits_on_sheet(dims=dims, t=t, cell_class=cell_class)
    )


def face_qubits(cell: tuple[int, int, int]) -> list[QubitCoord]:
    """
    The six face qubits of a cell in the order (-x, +x, -y, +y, -t, +t), unwrapped.
    """
    if cell_class_of(coord=cell) is None:
        raise LatticeParityError(coord=tuple(cell), expected="cell center")

    return [QubitCoord(cell[0] + dx, cell[1] + dy, cell[2] + dt) for dx, dy, dt in FACE_OFFSETS]


def incident_cells(q: tuple[int, int, int], dims: LatticeDims, cell_class: CellClass) -> list[CellCoord]:
    """
    Cells of the given class sharing face q.

    Two cells in the interior, one on an open boundary. On a periodic axis of
    length 1 both neighbours wrap onto the same cell and it is listed twice.

    Raises:
        LatticeParityError: q is not a face of this class
    """
    if face_class_of(coord=q) is not cell_class:
        raise LatticeParityError(coord=tuple(q), expected=f"{cell_class} face")

    _q = _wrap(coord=q, dims=dims)
    normal = normal_axis(q=_q)
    _cells: list[CellCoord] = []

    for direction in (-1, 1):
        c = list(_q)
        c[normal] += direction
        _cell = wrap_cell(cell=tuple(c), dims=dims)  # type: ignore[arg-type]
        if contains_cell(cell=_cell, dims=dims):
            _cells.append(_cell)

    return _cells


def axis_steps(a: tuple[int, int, int], b: tuple[int, int, int], dims: LatticeDims) -> tuple[int, int, int]:
    steps = []
    for axis in AXES:
        d = abs(a[axis] - b[axis])
        if dims.periodic(axis=axis):
            ext = dims.extent(axis=axis)
            d %= ext
            d = min(d, ext - d)
        steps.append(d // 2)
    return steps[0], steps[1], steps[2]


def cell_distance(a: tuple[int, int, int], b: tuple[int, int, int], dims: LatticeDims) -> int:
    """
    Manhattan distance in cell steps, taking the shorter way round on periodic axes.

    Raises:
        CellClassMismatchError: a and b are not cells of the same class
    """
    class_a = cell_class_of(coord=a)
    class_b = cell_class_of(coord=b)
    if class_a is None or class_a is not class_b:
        raise CellClassMismatchError(f"Cannot measure distance between {a} ({class_a}) and {b} ({class_b})")

    return sum(axis_steps(a=a, b=b, dims=dims))


def boundary_candidates(cell: tuple[int, int, int], dims: LatticeDims) -> list[BoundaryStep]:
    """
    One step per open axis side, ordered (x-, x+, y-, y+, t-, t+).

    The distance counts the qubits of the straight chain from the cell to the outer face layer.
    """
    _class = cell_class_of(coord=cell)
    if _class is None:
        raise LatticeParityError(coord=tuple(cell), expected="cell center")

    steps: list[BoundaryStep] = []
    for _axis in AXES:
        if dims.periodic(axis=_axis):
            continue

        v = cell[_axis]
        lo_face = _class.offset - 1
        hi_face = _class.offset + dims.extent(axis=_axis) - 1
        steps.append(BoundaryStep(distance=(v - lo_face + 1) // 2, axis=_axis, direction=-1))
        steps.append(BoundaryStep(distance=(hi_face - v + 1) // 2, axis=_axis, direction=1))

    return steps


def boundary_path(cell: tuple[int, int, int], step: BoundaryStep) -> list[QubitCoord]:
    cur = list(cell)
    path: list[QubitCoord] = []
    for _ in range(step.distance):
        q = list(cur)
        q[step.axis] += step.direction
        path.append(QubitCoord(*q))
        cur[step.axis] += 2 * step.direction
    return path


def axis_path(a: tuple[int, int, int], b: tuple[int, int, int], dims: LatticeDims) -> list[QubitCoord]:
    """
    Qubits along the shortest monotone path from cell a to cell b, walking x, then y, then t.

    On periodic axes the shorter way round is taken; an exact half-extent tie walks in +direction.
    """
    cur = list(a)
    _path: list[QubitCoord] = []

    for axis in AXES:
        diff = b[axis] - cur[axis]
        if dims.periodic(axis=axis):
            ext = dims.extent(axis=axis)
            diff %= ext
            if diff > ext - diff:
                diff -= ext

        _direction = 1 if diff > 0 else -1
        for _ in range(abs(diff) // 2):
            q = list(cur)
            q[axis] += _direction
            _path.append(wrap_qubit(q=tuple(q), dims=dims))  # type: ignore[arg-type]
            cur[axis] += 2 * _direction
            cur = list(_wrap(coord=tuple(cur), dims=dims))  # type: ignore[arg-type]

    return _path


def bond_neighbors(q: tuple[int, int, int], dims: LatticeDims) -> list[QubitCoord]:
    """
    Qubits bonded to q inside its unit cell: the four opposite-class faces at doubled distance 1.
    """
    _class = face_class_of(coord=q)
    if _class is None:
        raise LatticeParityError(coord=tuple(q), expected="qubit")

    normal = normal_axis(q=q)
    neighbors: list[QubitCoord] = []
    for axis in AXES:
        if axis == normal:
            continue
        for direction in (-1, 1):
            n = list(q)
            n[axis] += direction
            neighbor = wrap_qubit(q=tuple(n), dims=dims)  # type: ignore[arg-type]
            if contains_qubit(q=neighbor, dims=dims, cell_class=_class.opposite):
                neighbors.append(neighbor)

    return neighbors


def dual_shift(cell: tuple[int, int, int], dims: LatticeDims) -> CellCoord:
    return wrap_cell(cell=(cell[0] + 1, cell[1] + 1, cell[2] + 1), dims=dims)
