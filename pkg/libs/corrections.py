from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass

from libs.lattice import CellClass, LatticeDims, QubitCoord, axis_path, boundary_path
from libs.matching.graph import SyndromeGraph
from libs.matching.mwpm import Matching


@dataclass(frozen=True)
class CorrectionSet:
    cell_class: CellClass
    qubits: frozenset[QubitCoord]

    @classmethod
    def empty(cls, cell_class: CellClass) -> CorrectionSet:
        return cls(cell_class=cell_class, qubits=frozenset())

    @classmethod
    def from_toggles(cls, cell_class: CellClass, qubits: Iterable[QubitCoord]) -> CorrectionSet:
        # each occurrence flips the qubit; even counts cancel
        toggled: set[QubitCoord] = set()
        for q in qubits:
            toggled ^= {q}
        return cls(cell_class=cell_class, qubits=frozenset(toggled))

    def ordered(self) -> list[QubitCoord]:
        return sorted(self.qubits, key=lambda q: (q.t, q.y, q.x))

    def __iter__(self) -> Iterator[QubitCoord]:
        return iter(self.ordered())

    def __len__(self) -> int:
        return len(self.qubits)

    def __bool__(self) -> bool:
        return bool(self.qubits)

    def __xor__(self, other: CorrectionSet) -> CorrectionSet:
        return CorrectionSet(cell_class=self.cell_class, qubits=self.qubits ^ other.qubits)


def pair_path(graph: SyndromeGraph, u: int, v: int, dims: LatticeDims) -> list[QubitCoord]:
    """
    Qubits flipped to resolve one matched pair (u < v).

    Two real vertices are joined by the axis-ordered shortest path from u; a real vertex
    matched to its pseudo-vertex walks to its chosen boundary; two pseudo-vertices cost nothing.
    """
    if graph.is_boundary(vertex=u):
        return []

    start = graph.cells[u]
    if graph.is_boundary(vertex=v):
        return boundary_path(cell=start, step=graph.boundary_steps[u])  # type: ignore[index]

    return axis_path(a=start, b=graph.cells[v], dims=dims)


def corrections_from_matching(
    m: Matching, g: SyndromeGraph, dims: LatticeDims, cell_class: CellClass | None = None
) -> CorrectionSet:
    _class = cell_class or g.cell_class
    if _class is None:
        raise ValueError("Cell class of an empty syndrome graph must be given explicitly")

    return CorrectionSet.from_toggles(
        cell_class=_class,
        qubits=(q for u, v in m.pairs for q in pair_path(graph=g, u=u, v=v, dims=dims)),
    )
