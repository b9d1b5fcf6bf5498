from __future__ import annotations

import functools
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

from simple_logger.logger import get_logger

from exceptions.exceptions import CellClassMismatchError
from libs.lattice import AXIS_NAMES, BoundaryStep, CellClass, CellCoord, LatticeDims, axis_steps, boundary_candidates
from libs.syndrome import SyndromeSet

LOGGER = get_logger(__name__)

AxisWeights = tuple[int, int, int]
BoundaryFinder = Callable[[CellCoord], list[BoundaryStep]]

DEFAULT_AXIS_WEIGHTS: AxisWeights = (1, 1, 1)


@dataclass
class SyndromeGraph:
    """
    Weighted matching instance over parity flips.

    Real vertices 0..n-1 map to flip cells in the order they were given. With boundaries,
    vertex n+i is the boundary pseudo-vertex of real vertex i.
    """

    cell_class: CellClass | None
    cells: list[CellCoord]
    edges: list[tuple[int, int, int]]
    boundary_steps: list[BoundaryStep] | None = None
    index: dict[CellCoord, int] = field(init=False, repr=False)
    _weights: dict[tuple[int, int], int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.index = {cell: vertex for vertex, cell in enumerate(self.cells)}
        if len(self.index) != len(self.cells):
            raise ValueError("Syndrome graph lookup must be injective over real vertices")

        self._weights = {}
        for u, v, w in self.edges:
            self._weights[(u, v)] = self._weights[(v, u)] = w

    @property
    def num_real(self) -> int:
        return len(self.cells)

    @property
    def has_boundary(self) -> bool:
        return self.boundary_steps is not None

    @property
    def num_vertices(self) -> int:
        return 2 * self.num_real if self.has_boundary else self.num_real

    def is_boundary(self, vertex: int) -> bool:
        return vertex >= self.num_real

    def lookup(self, vertex: int) -> CellCoord | None:
        return None if self.is_boundary(vertex=vertex) else self.cells[vertex]

    def weight(self, u: int, v: int) -> int:
        return self._weights[(u, v)]

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._weights

    def dump(self) -> str:
        """
        Plain-text debug dump: a lookup section, then one "u v w" line per edge.
        """
        lines = [f"# lookup {self.cell_class or '-'} {self.num_real} real {self.num_vertices} total"]
        lines.extend(f"{vertex} {c.x} {c.y} {c.t}" for vertex, c in enumerate(self.cells))
        if self.boundary_steps is not None:
            lines.append("# boundary")
            for vertex, step in enumerate(self.boundary_steps):
                side = f"{AXIS_NAMES[step.axis]}{'+' if step.direction > 0 else '-'}"
                lines.append(f"{self.num_real + vertex} {vertex} {step.distance} {side}")
        lines.append("# edges")
        lines.extend(f"{_u} {_v} {_w}" for _u, _v, _w in self.edges)
        return "\n".join(lines) + "\n"


def weighted_distance(a: CellCoord, b: CellCoord, dims: LatticeDims, axis_weights: AxisWeights) -> int:
    return sum(steps * weight for steps, weight in zip(axis_steps(a=a, b=b, dims=dims), axis_weights))


def weighted_nearest_boundary(candidates: Sequence[BoundaryStep], axis_weights: AxisWeights) -> BoundaryStep | None:
    # min keeps the first of equal candidates: x-, x+, y-, y+, t-, t+
    if not candidates:
        return None
    return min(candidates, key=lambda step: step.distance * axis_weights[step.axis])


def build_graph(
    flips: SyndromeSet | Sequence[CellCoord],
    dims: LatticeDims,
    axis_weights: AxisWeights = DEFAULT_AXIS_WEIGHTS,
    sparsify_k: int | None = None,
    boundary: BoundaryFinder | None = None,
) -> SyndromeGraph:
    """
    Build the matching graph over a set of parity flips.

    Args:
        flips (SyndromeSet | Sequence[CellCoord]): flips of one class; a SyndromeSet is taken in
            emission order, a sequence as given
        dims (LatticeDims): lattice dimensions, for wrap-around distances
        axis_weights (AxisWeights): per-axis cost of one cell step
        sparsify_k (int | None): connect each flip only to its k nearest flips, complete graph when None
        boundary (BoundaryFinder | None): boundary candidates of a cell; defaults to the open
            boundaries of dims

    Returns:
        SyndromeGraph: the matching instance, with one boundary pseudo-vertex per flip when any
            boundary exists

    Raises:
        CellClassMismatchError: flips of both classes were given
    """
    if isinstance(flips, SyndromeSet):
        cells = flips.ordered()
        _class: CellClass | None = flips.cell_class
    else:
        cells = list(flips)
        _class = cells[0].cell_class if cells else None

    if any(_cell.cell_class is not _class for _cell in cells):
        raise CellClassMismatchError(f"Syndrome graph needs flips of a single class, got a mix around {_class}")

    _finder = boundary
    if _finder is None and not dims.fully_periodic:
        _finder = functools.partial(_open_boundaries, dims=dims)

    n = len(cells)
    pair_weights = {
        (u, v): weighted_distance(a=cells[u], b=cells[v], dims=dims, axis_weights=axis_weights)
        for u in range(n)
        for v in range(u + 1, n)
    }

    if sparsify_k is not None and sparsify_k < n - 1:
        kept: set[tuple[int, int]] = set()
        for u in range(n):
            others = sorted(
                (v for v in range(n) if v != u),
                key=lambda v: (pair_weights[(min(u, v), max(u, v))], v),
            )
            kept.update((min(u, v), max(u, v)) for v in others[:sparsify_k])
        _edges = [(u, v, pair_weights[(u, v)]) for u, v in sorted(kept)]
    else:
        _edges = [(u, v, w) for (u, v), w in pair_weights.items()]

    steps: list[BoundaryStep] | None = None
    if _finder is not None and n:
        steps = []
        for _vertex, _cell in enumerate(cells):
            _step = weighted_nearest_boundary(candidates=_finder(_cell), axis_weights=axis_weights)
            if _step is None:
                raise ValueError(f"Boundary finder returned no candidate for {_cell}")
            steps.append(_step)
            _edges.append((_vertex, n + _vertex, _step.distance * axis_weights[_step.axis]))

        _edges.extend((n + u, n + v, 0) for u in range(n) for v in range(u + 1, n))

    LOGGER.debug(f"Built {_class} syndrome graph: {n} flips, {len(_edges)} edges, boundary={steps is not None}")
    return SyndromeGraph(cell_class=_class, cells=cells, edges=_edges, boundary_steps=steps)


def _open_boundaries(cell: CellCoord, dims: LatticeDims) -> list[BoundaryStep]:
    return boundary_candidates(cell=cell, dims=dims)
