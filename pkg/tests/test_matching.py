import itertools

import networkx as nx
import pytest

from exceptions.exceptions import CellClassMismatchError, NoPerfectMatchingError, OddSyndromeError, TooManyVerticesError
from libs.lattice import BoundaryMode, BoundaryStep, CellClass, CellCoord, LatticeDims, all_cells, boundary_candidates
from libs.matching.blossom import max_weight_matching
from libs.matching.brute_force import BRUTE_FORCE_LIMIT, brute_force_matching
from libs.matching.components import MatchingOptions, match_flips, match_group, split_components
from libs.matching.graph import SyndromeGraph, build_graph, weighted_distance, weighted_nearest_boundary
from libs.matching.mwpm import mwpm
from libs.syndrome import SyndromeSet

pytestmark = pytest.mark.tier0


def _random_flips(rng, dims, count, cell_class=CellClass.PRIMAL):
    cells = all_cells(dims=dims, cell_class=cell_class)
    return [cells[idx] for idx in sorted(rng.choice(len(cells), size=count, replace=False))]


def _networkx_min_weight(graph):
    ceiling = max(w for _, _, w in graph.edges) + 1
    nx_graph = nx.Graph()
    nx_graph.add_weighted_edges_from((u, v, ceiling - w) for u, v, w in graph.edges)
    mates = nx.max_weight_matching(nx_graph, maxcardinality=True)
    assert 2 * len(mates) == graph.num_vertices
    return sum(graph.weight(u=u, v=v) for u, v in mates)


def _greedy_weight(graph):
    matched: set[int] = set()
    total = 0
    for u, v, weight in sorted(graph.edges, key=lambda edge: (edge[2], edge[0], edge[1])):
        if u not in matched and v not in matched:
            matched.update((u, v))
            total += weight
    assert len(matched) == graph.num_vertices
    return total


class TestSyndromeGraph:
    def test_complete_graph_without_boundary(self, periodic_dims):
        cells = [CellCoord(0, 0, 0), CellCoord(2, 0, 0), CellCoord(6, 6, 6)]
        graph = build_graph(flips=cells, dims=periodic_dims)
        assert not graph.has_boundary
        assert graph.num_vertices == 3
        assert sorted(graph.edges) == [(0, 1, 1), (0, 2, 3), (1, 2, 4)]
        assert graph.lookup(vertex=2) == CellCoord(6, 6, 6)

    def test_boundary_pseudo_vertices(self, open_dims):
        graph = build_graph(flips=[CellCoord(0, 0, 0), CellCoord(4, 2, 2)], dims=open_dims)
        assert graph.num_vertices == 4
        assert graph.boundary_steps == [
            BoundaryStep(distance=1, axis=0, direction=-1),
            BoundaryStep(distance=1, axis=0, direction=1),
        ]
        assert graph.weight(u=0, v=2) == 1
        assert graph.weight(u=2, v=3) == 0
        assert not graph.has_edge(u=0, v=3)
        assert graph.is_boundary(vertex=3)
        assert graph.lookup(vertex=3) is None

    def test_weighted_nearest_boundary(self, open_dims, periodic_dims):
        hi = open_dims.lx - 1
        for cell, expected in (
            ((2 * hi, 2, 2), BoundaryStep(distance=1, axis=0, direction=1)),
            ((1, 1, 1), BoundaryStep(distance=1, axis=0, direction=-1)),
        ):
            candidates = boundary_candidates(cell=cell, dims=open_dims)
            assert weighted_nearest_boundary(candidates=candidates, axis_weights=(1, 1, 1)) == expected
        # a heavier x axis sends the corner cell out through y
        candidates = boundary_candidates(cell=(0, 0, 2), dims=open_dims)
        assert weighted_nearest_boundary(candidates=candidates, axis_weights=(3, 1, 1)) == BoundaryStep(
            distance=1, axis=1, direction=-1
        )
        candidates = boundary_candidates(cell=(0, 0, 0), dims=periodic_dims)
        assert weighted_nearest_boundary(candidates=candidates, axis_weights=(1, 1, 1)) is None

    def test_syndrome_set_taken_in_emission_order(self, periodic_dims):
        flips = SyndromeSet(cell_class=CellClass.DUAL, flips=frozenset({CellCoord(1, 1, 3), CellCoord(3, 1, 1)}))
        assert build_graph(flips=flips, dims=periodic_dims).cells == [CellCoord(3, 1, 1), CellCoord(1, 1, 3)]

    def test_mixed_classes_rejected(self, periodic_dims):
        with pytest.raises(CellClassMismatchError):
            build_graph(flips=[CellCoord(0, 0, 0), CellCoord(1, 1, 1)], dims=periodic_dims)

    def test_axis_weights(self, periodic_dims):
        distance = weighted_distance(
            a=CellCoord(0, 0, 0), b=CellCoord(2, 2, 2), dims=periodic_dims, axis_weights=(1, 2, 5)
        )
        assert distance == 8

    def test_sparsify_keeps_nearest(self, periodic_dims):
        cells = [CellCoord(0, 0, 0), CellCoord(2, 0, 0), CellCoord(0, 4, 0), CellCoord(2, 4, 0)]
        graph = build_graph(flips=cells, dims=periodic_dims, sparsify_k=1)
        assert graph.edges == [(0, 1, 1), (2, 3, 1)]

    def test_dump(self, open_dims):
        dump = build_graph(flips=[CellCoord(0, 0, 0)], dims=open_dims).dump()
        assert dump.splitlines() == [
            "# lookup primal 1 real 2 total",
            "0 0 0 0",
            "# boundary",
            "1 0 1 x-",
            "# edges",
            "0 1 1",
        ]


class TestMwpm:
    def test_empty(self, periodic_dims):
        matching = mwpm(graph=build_graph(flips=[], dims=periodic_dims))
        assert matching.pairs == ()
        assert matching.total_weight == 0

    def test_odd_without_boundary(self, periodic_dims):
        with pytest.raises(OddSyndromeError):
            mwpm(graph=build_graph(flips=[CellCoord(0, 0, 0)], dims=periodic_dims))

    def test_canonical_tie_break(self):
        dims = LatticeDims(lx=8, ly=8, lt=8)
        cells = [CellCoord(0, 0, 0), CellCoord(2, 0, 0), CellCoord(0, 2, 0), CellCoord(2, 2, 0)]
        matching = mwpm(graph=build_graph(flips=cells, dims=dims))
        assert matching.pairs == ((0, 1), (2, 3))
        assert matching.total_weight == 2

    def test_lone_flip_goes_to_boundary(self, open_dims):
        graph = build_graph(flips=[CellCoord(2, 2, 2)], dims=open_dims)
        matching = mwpm(graph=graph)
        assert matching.pairs == ((0, 1),)
        assert matching.partner(vertex=0) == 1
        assert matching.covers(graph=graph)

    @pytest.mark.parametrize("boundary_mode", [BoundaryMode.PERIODIC, BoundaryMode.OPEN], ids=["periodic", "open"])
    def test_mwpm_matches_brute_force(self, tests_params, rng, boundary_mode):
        _l = tests_params["size"]
        dims = LatticeDims(lx=_l, ly=_l, lt=_l, boundary_mode=boundary_mode)
        step = 2 if boundary_mode is BoundaryMode.PERIODIC else 1

        for _instance in range(tests_params["instances"]):
            count = int(rng.integers(1, tests_params["max_flips"] // step + 1)) * step
            graph = build_graph(flips=_random_flips(rng=rng, dims=dims, count=count), dims=dims)
            expected = brute_force_matching(graph=graph)
            matching = mwpm(graph=graph, verify=_instance % 50 == 0)
            assert matching == expected, f"instance {_instance}: {graph.cells}"

    @pytest.mark.parametrize("boundary_mode", [BoundaryMode.PERIODIC, BoundaryMode.OPEN], ids=["periodic", "open"])
    def test_mwpm_matches_networkx(self, tests_params, rng, boundary_mode):
        _l = tests_params["size"]
        dims = LatticeDims(lx=_l, ly=_l, lt=_l, boundary_mode=boundary_mode)

        for _instance in range(tests_params["instances"]):
            count = 2 * int(rng.integers(tests_params["min_flips"] // 2, tests_params["max_flips"] // 2 + 1))
            graph = build_graph(flips=_random_flips(rng=rng, dims=dims, count=count), dims=dims)
            matching = mwpm(graph=graph)
            assert matching.covers(graph=graph)
            assert matching.total_weight == _networkx_min_weight(graph=graph), f"instance {_instance}"

    @pytest.mark.parametrize("boundary_mode", [BoundaryMode.PERIODIC, BoundaryMode.OPEN], ids=["periodic", "open"])
    def test_scaled_weights_keep_matching(self, tests_params, rng, boundary_mode):
        size = tests_params["size"]
        dims = LatticeDims(lx=size, ly=size, lt=size, boundary_mode=boundary_mode)
        step = 2 if boundary_mode is BoundaryMode.PERIODIC else 1

        for instance in range(tests_params["instances"]):
            count = int(rng.integers(1, tests_params["max_flips"] // step + 1)) * step
            graph = build_graph(flips=_random_flips(rng=rng, dims=dims, count=count), dims=dims)
            matching = mwpm(graph=graph)
            for scale in tests_params["scales"]:
                scaled = SyndromeGraph(
                    cell_class=graph.cell_class,
                    cells=graph.cells,
                    edges=[(u, v, weight * scale) for u, v, weight in graph.edges],
                    boundary_steps=graph.boundary_steps,
                )
                scaled_matching = mwpm(graph=scaled)
                assert scaled_matching.pairs == matching.pairs, f"instance {instance}, scale {scale}"
                assert scaled_matching.total_weight == scale * matching.total_weight

    def test_not_heavier_than_greedy(self, tests_params, rng):
        size = tests_params["size"]
        dims = LatticeDims(lx=size, ly=size, lt=size, boundary_mode=BoundaryMode.PERIODIC)

        for instance in range(tests_params["instances"]):
            count = 2 * int(rng.integers(1, tests_params["max_flips"] // 2 + 1))
            graph = build_graph(flips=_random_flips(rng=rng, dims=dims, count=count), dims=dims)
            assert mwpm(graph=graph).total_weight <= _greedy_weight(graph=graph), f"instance {instance}"


class TestBruteForce:
    def test_too_many_vertices(self, periodic_dims):
        cells = all_cells(dims=periodic_dims, cell_class=CellClass.PRIMAL)[: BRUTE_FORCE_LIMIT + 2]
        with pytest.raises(TooManyVerticesError):
            brute_force_matching(graph=build_graph(flips=cells, dims=periodic_dims))

    def test_no_perfect_matching(self):
        dims = LatticeDims(lx=8, ly=8, lt=8)
        star = [CellCoord(0, 2, 0), CellCoord(2, 2, 0), CellCoord(4, 2, 0), CellCoord(2, 4, 0)]
        with pytest.raises(NoPerfectMatchingError):
            brute_force_matching(graph=build_graph(flips=star, dims=dims, sparsify_k=1))


class TestBlossom:
    def test_max_weight(self):
        assert max_weight_matching(num_vertices=4, edges=[(0, 1, 5), (1, 2, 11), (2, 3, 5)]) == [-1, 2, 1, -1]

    def test_max_cardinality(self):
        assert max_weight_matching(
            num_vertices=4, edges=[(0, 1, 5), (1, 2, 11), (2, 3, 5)], max_cardinality=True, verify=True
        ) == [1, 0, 3, 2]

    def test_odd_cycle(self):
        # a triangle plus a pendant forces a blossom
        mates = max_weight_matching(
            num_vertices=4, edges=[(0, 1, 6), (0, 2, 10), (1, 2, 5), (2, 3, 7)], max_cardinality=True, verify=True
        )
        assert mates == [1, 0, 3, 2]


class TestComponents:
    def test_sparse_graph_falls_back_to_complete(self):
        dims = LatticeDims(lx=8, ly=8, lt=8)
        star = [CellCoord(0, 2, 0), CellCoord(2, 2, 0), CellCoord(4, 2, 0), CellCoord(2, 4, 0)]
        with pytest.raises(NoPerfectMatchingError):
            mwpm(graph=build_graph(flips=star, dims=dims, sparsify_k=1))

        group = match_group(cells=star, dims=dims, options=MatchingOptions(sparsify_k=1))
        assert group.matching.total_weight == 3
        assert len(group.graph.edges) == 6

    def test_split_wraps_periodic_axis(self, periodic_dims):
        cells = [CellCoord(0, 0, 0), CellCoord(4, 4, 4), CellCoord(6, 0, 0), CellCoord(4, 6, 4)]
        assert split_components(cells=cells, dims=periodic_dims, cutoff=1) == [[0, 2], [1, 3]]

    @pytest.mark.parametrize("cutoff", [1, 2, 3], ids=["cutoff-1", "cutoff-2", "cutoff-3"])
    @pytest.mark.parametrize("boundary_mode", [BoundaryMode.PERIODIC, BoundaryMode.OPEN], ids=["periodic", "open"])
    def test_split_matches_pairwise_scan(self, rng, cutoff, boundary_mode):
        dims = LatticeDims(lx=7, ly=7, lt=5, boundary_mode=boundary_mode)
        for _ in range(20):
            cells = _random_flips(rng=rng, dims=dims, count=30)
            nx_graph = nx.Graph()
            nx_graph.add_nodes_from(range(len(cells)))
            nx_graph.add_edges_from(
                (u, v)
                for u, v in itertools.combinations(range(len(cells)), 2)
                if weighted_distance(a=cells[u], b=cells[v], dims=dims, axis_weights=(1, 1, 1)) <= cutoff
            )
            expected = sorted(sorted(group) for group in nx.connected_components(nx_graph))
            assert sorted(split_components(cells=cells, dims=dims, cutoff=cutoff)) == expected

    def test_odd_component_without_boundary_merges(self, periodic_dims):
        cells = [CellCoord(0, 0, 0), CellCoord(2, 0, 0), CellCoord(4, 0, 0), CellCoord(4, 4, 4)]
        groups = match_flips(cells=cells, dims=periodic_dims, options=MatchingOptions(component_cutoff=1))
        assert len(groups) == 1
        assert groups[0].matching.covers(graph=groups[0].graph)

    def test_workers_do_not_change_result(self, rng):
        dims = LatticeDims(lx=9, ly=9, lt=9, boundary_mode=BoundaryMode.OPEN)
        cells = _random_flips(rng=rng, dims=dims, count=40)
        serial, threaded = (
            match_flips(cells=cells, dims=dims, options=MatchingOptions(component_cutoff=2, workers=workers))
            for workers in (1, 4)
        )
        assert [(g.graph.cells, g.matching) for g in serial] == [(g.graph.cells, g.matching) for g in threaded]
