from __future__ import annotations

from simple_logger.logger import get_logger

from exceptions.exceptions import NoPerfectMatchingError, OddSyndromeError, TooManyVerticesError
from libs.matching.graph import SyndromeGraph
from libs.matching.mwpm import Matching

LOGGER = get_logger(__name__)

BRUTE_FORCE_LIMIT: int = 12


def _pairings(graph: SyndromeGraph, free: list[int]) -> list[list[tuple[int, int]]]:
    """
    Every way of covering the free real vertices, each one paired with another free
    real vertex or with its own boundary pseudo-vertex.
    """
    if not free:
        return [[]]

    u, rest = free[0], free[1:]
    options: list[list[tuple[int, int]]] = []

    if graph.has_boundary:
        options.extend([(u, graph.num_real + u), *tail] for tail in _pairings(graph=graph, free=rest))

    for idx, v in enumerate(rest):
        if not graph.has_edge(u=u, v=v):
            continue
        remaining = rest[:idx] + rest[idx + 1 :]
        options.extend([(u, v), *tail] for tail in _pairings(graph=graph, free=remaining))

    return options


def brute_force_matching(graph: SyndromeGraph) -> Matching:
    """
    Minimum-weight perfect matching by exhaustive enumeration.

    Among equal-weight matchings the lexicographically smallest sorted pair list wins,
    the same tie-break mwpm applies. Boundary pseudo-vertices left over are paired
    in increasing order at zero cost.

    Raises:
        TooManyVerticesError: more than BRUTE_FORCE_LIMIT real vertices
        OddSyndromeError: odd number of flips and no boundary
        NoPerfectMatchingError: no perfect matching exists
    """
    if graph.num_real > BRUTE_FORCE_LIMIT:
        raise TooManyVerticesError(f"Brute force supports {BRUTE_FORCE_LIMIT} real vertices, got {graph.num_real}")

    if graph.num_real == 0:
        return Matching.empty()

    if not graph.has_boundary and graph.num_real % 2:
        raise OddSyndromeError(f"{graph.num_real} {graph.cell_class} flips cannot be paired without a boundary")

    best: tuple[int, list[tuple[int, int]]] | None = None
    for real_pairs in _pairings(graph=graph, free=list(range(graph.num_real))):
        used = {vertex for _pair in real_pairs for vertex in _pair}
        leftover = [v for v in range(graph.num_real, graph.num_vertices) if v not in used]
        pairs = sorted(real_pairs + list(zip(leftover[::2], leftover[1::2])))
        _weight = sum(graph.weight(u=u, v=v) for u, v in pairs)

        if best is None or (_weight, pairs) < best:
            best = (_weight, pairs)

    if best is None:
        raise NoPerfectMatchingError(f"{graph.cell_class} graph has no perfect matching")

    LOGGER.debug(f"Brute force matched {graph.num_real} flips, total weight {best[0]}")
    return Matching(pairs=tuple(best[1]), total_weight=best[0])
