from __future__ import annotations

import itertools
import time
from collections.abc import Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import NamedTuple

from simple_logger.logger import get_logger

from exceptions.exceptions import NoPerfectMatchingError
from libs.lattice import AXES, CellCoord, LatticeDims, wrap_cell
from libs.matching.graph import (
    DEFAULT_AXIS_WEIGHTS,
    AxisWeights,
    BoundaryFinder,
    SyndromeGraph,
    build_graph,
    weighted_distance,
)
from libs.matching.mwpm import DEFAULT_CANONICAL_LIMIT, Matching, mwpm

LOGGER = get_logger(__name__)


@dataclass(frozen=True)
class MatchingOptions:
    axis_weights: AxisWeights = DEFAULT_AXIS_WEIGHTS
    sparsify_k: int | None = None
    canonical_limit: int = DEFAULT_CANONICAL_LIMIT
    # split flips into components joined below this weighted distance; None matches the whole set at once
    component_cutoff: int | None = None
    workers: int = 1


class _DisjointSet:
    def __init__(self, size: int) -> None:
        self.parent = list(range(size))

    def find(self, item: int) -> int:
        while self.parent[item] != item:
            self.parent[item] = self.parent[self.parent[item]]
            item = self.parent[item]
        return item

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(item=a), self.find(item=b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def split_components(
    cells: Sequence[CellCoord], dims: LatticeDims, cutoff: int, axis_weights: AxisWeights = DEFAULT_AXIS_WEIGHTS
) -> list[list[int]]:
    """
    Group flips whose weighted distance is at most cutoff, transitively.

    Returns:
        list[list[int]]: indices into cells, each group ascending, groups ordered by their first index
    """
    _groups = _DisjointSet(size=len(cells))
    for u, v in _candidate_pairs(cells=cells, dims=dims, cutoff=cutoff, axis_weights=axis_weights):
        if weighted_distance(a=cells[u], b=cells[v], dims=dims, axis_weights=axis_weights) <= cutoff:
            _groups.union(a=u, b=v)

    by_root: dict[int, list[int]] = {}
    for idx in range(len(cells)):
        by_root.setdefault(_groups.find(item=idx), []).append(idx)
    return list(by_root.values())


def _candidate_pairs(
    cells: Sequence[CellCoord], dims: LatticeDims, cutoff: int, axis_weights: AxisWeights
) -> Iterator[tuple[int, int]]:
    """
    Index pairs (u < v) that may lie within cutoff: cells are bucketed in boxes wider than
    any qualifying separation, and only cells in the same or adjacent boxes are paired.
    """
    if min(axis_weights) < 1:
        yield from itertools.combinations(range(len(cells)), 2)
        return

    # doubled-coordinate reach along each axis
    _reach = [2 * (cutoff // weight) for weight in axis_weights]
    sizes = [r + 1 for r in _reach]
    counts = [
        -(-dims.extent(axis=_axis) // sizes[_axis]) if dims.periodic(axis=_axis) else None for _axis in AXES
    ]

    def _box(cell: CellCoord) -> tuple[int, ...]:
        wrapped = wrap_cell(cell=cell, dims=dims)
        return tuple(wrapped[_axis] // sizes[_axis] for _axis in AXES)

    _boxes: dict[tuple[int, ...], list[int]] = {}
    for idx, _cell in enumerate(cells):
        _boxes.setdefault(_box(cell=_cell), []).append(idx)

    # a short last box on a periodic axis can sit between two cells within reach
    spans = [
        range(-2, 3) if counts[_axis] and dims.extent(axis=_axis) % sizes[_axis] else range(-1, 2) for _axis in AXES
    ]

    for key, members in _boxes.items():
        near: set[tuple[int, ...]] = set()
        for offset in itertools.product(*spans):
            near.add(
                tuple(
                    (key[_axis] + offset[_axis]) % counts[_axis]  # type: ignore[operator]
                    if counts[_axis]
                    else key[_axis] + offset[_axis]
                    for _axis in AXES
                )
            )
        for other in near:
            for _u in members:
                for _v in _boxes.get(other, ()):
                    if _u < _v:
                        yield _u, _v


class MatchedGroup(NamedTuple):
    graph: SyndromeGraph
    matching: Matching
    graph_seconds: float
    matching_seconds: float


def match_group(
    cells: Sequence[CellCoord], dims: LatticeDims, options: MatchingOptions, boundary: BoundaryFinder | None = None
) -> MatchedGroup:
    """
    Build and match one group of flips, falling back to the complete graph when the
    sparsified graph has no perfect matching.
    """
    start = time.perf_counter()
    _graph = build_graph(
        flips=cells, dims=dims, axis_weights=options.axis_weights, sparsify_k=options.sparsify_k, boundary=boundary
    )
    built = time.perf_counter()
    try:
        _matching = mwpm(graph=_graph, canonical_limit=options.canonical_limit)
        return MatchedGroup(
            graph=_graph,
            matching=_matching,
            graph_seconds=built - start,
            matching_seconds=time.perf_counter() - built,
        )
    except NoPerfectMatchingError:
        if options.sparsify_k is None:
            raise

    LOGGER.warning(f"Sparse graph over {len(cells)} flips has no perfect matching, retrying with the complete graph")
    _graph = build_graph(flips=cells, dims=dims, axis_weights=options.axis_weights, boundary=boundary)
    built = time.perf_counter()
    _matching = mwpm(graph=_graph, canonical_limit=options.canonical_limit)
    return MatchedGroup(
        graph=_graph,
        matching=_matching,
        graph_seconds=built - start,
        matching_seconds=time.perf_counter() - built,
    )


def match_flips(
    cells: Sequence[CellCoord], dims: LatticeDims, options: MatchingOptions, boundary: BoundaryFinder | None = None
) -> list[MatchedGroup]:
    """
    Match a set of same-class flips, optionally split into independent components matched in parallel.

    Results come back in component order regardless of worker count.
    """
    has_boundary = boundary is not None or not dims.fully_periodic
    groups = [list(range(len(cells)))]
    if options.component_cutoff is not None and len(cells) > 1:
        groups = split_components(
            cells=cells, dims=dims, cutoff=options.component_cutoff, axis_weights=options.axis_weights
        )
        if not has_boundary and any(len(group) % 2 for group in groups):
            LOGGER.debug(f"Odd component among {len(groups)} without a boundary, matching all flips together")
            groups = [list(range(len(cells)))]

    group_cells = [[cells[idx] for idx in group] for group in groups]
    if options.workers <= 1 or len(group_cells) == 1:
        return [match_group(cells=_cells, dims=dims, options=options, boundary=boundary) for _cells in group_cells]

    results: dict[int, MatchedGroup] = {}
    with ThreadPoolExecutor(max_workers=options.workers) as executor:
        futures = {
            executor.submit(match_group, cells=_cells, dims=dims, options=options, boundary=boundary): idx
            for idx, _cells in enumerate(group_cells)
        }
        for future in as_completed(futures):
            results[futures[future]] = future.result()

    return [results[idx] for idx in range(len(group_cells))]
