from __future__ import annotations

from dataclasses import dataclass

from simple_logger.logger import get_logger

from exceptions.exceptions import NoPerfectMatchingError, OddSyndromeError
from libs.matching.blossom import max_weight_matching
from libs.matching.graph import SyndromeGraph

LOGGER = get_logger(__name__)

DEFAULT_CANONICAL_LIMIT: int = 64


@dataclass(frozen=True)
class Matching:
    # sorted (u, v) pairs with u < v
    pairs: tuple[tuple[int, int], ...]
    total_weight: int

    @classmethod
    def empty(cls) -> Matching:
        return cls(pairs=(), total_weight=0)

    def partner(self, vertex: int) -> int | None:
        for u, v in self.pairs:
            if u == vertex:
                return v
            if v == vertex:
                return u
        return None

    def covers(self, graph: SyndromeGraph) -> bool:
        covered = {vertex for pair in self.pairs for vertex in pair}
        return len(covered) == 2 * len(self.pairs) and covered == set(range(graph.num_vertices))


def canonical_costs(graph: SyndromeGraph) -> list[tuple[int, int, int]]:
    """
    Perturbed edge costs whose unique minimum is the lexicographically smallest sorted
    pair list among the minimum-weight perfect matchings.

    A matching's perturbation is the base-n number whose digit u is the partner of u
    when u is the smaller end of its pair, 0 otherwise. It stays below n**n, so the
    weight scaled by n**n still dominates.
    """
    _n = graph.num_vertices
    scale = _n**_n
    return [(_u, v, w * scale + max(_u, v) * _n ** (_n - 1 - min(_u, v))) for _u, v, w in graph.edges]


def mwpm(graph: SyndromeGraph, canonical_limit: int = DEFAULT_CANONICAL_LIMIT, verify: bool = False) -> Matching:
    """
    Exact minimum-weight perfect matching of a syndrome graph.

    Ties are broken towards the lexicographically smallest sorted pair list on graphs of at
    most canonical_limit vertices; larger graphs keep the solver's own deterministic choice.

    Raises:
        OddSyndromeError: odd number of flips and no boundary to absorb one
        NoPerfectMatchingError: the (sparsified) graph admits no perfect matching
    """
    if graph.num_real == 0:
        return Matching.empty()

    if not graph.has_boundary and graph.num_real % 2:
        raise OddSyndromeError(f"{graph.num_real} {graph.cell_class} flips cannot be paired without a boundary")

    costs = canonical_costs(graph=graph) if graph.num_vertices <= canonical_limit else graph.edges
    # minimum cost among maximum-cardinality matchings == maximum of (ceiling - cost)
    _ceiling = max(c for _, _, c in costs) + 1
    mates = max_weight_matching(
        num_vertices=graph.num_vertices,
        edges=[(u, v, _ceiling - c) for u, v, c in costs],
        max_cardinality=True,
        verify=verify,
    )

    if any(mate < 0 for mate in mates):
        _unmatched = sum(1 for mate in mates if mate < 0)
        raise NoPerfectMatchingError(
            f"{graph.cell_class} graph with {graph.num_vertices} vertices leaves {_unmatched} unmatched"
        )

    pairs = tuple((u, mate) for u, mate in enumerate(mates) if u < mate)
    _matching = Matching(pairs=pairs, total_weight=sum(graph.weight(u=u, v=v) for u, v in pairs))
    LOGGER.debug(f"Matched {graph.num_real} {graph.cell_class} flips, total weight {_matching.total_weight}")
    return _matching
