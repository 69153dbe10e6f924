import json

import numpy as np
import pytest

from graphqft.errors import (
    GraphQFTError,
    IdentificationMismatch,
    NonPositiveMass,
    OverlappingMarkings,
)
from graphqft.graphs import (
    BoundaryMarking,
    Cobordism,
    GluingSpec,
    Graph,
    block_indices,
    circle_graph,
    dumps,
    glue,
    grid_graph,
    kinetic,
    line_graph,
    loads,
    self_glue,
)

from conftest import random_multigraph


def incidence_matrix(g: Graph) -> np.ndarray:
    """Independent oracle: signed edge-vertex incidence; loops give zero rows."""
    d = np.zeros((len(g.edges), g.n))
    for k, (a, b) in enumerate(g.edges):
        if a == b:
            continue
        d[k, g.index(a)] = 1.0
        d[k, g.index(b)] = -1.0
    return d


def count_paths_brute(g: Graph, u: str, v: str, k: int) -> int:
    """Independent DFS path counter (no shared code with the library)."""
    if k == 0:
        return 1 if u == v else 0
    total = 0
    for a, b in g.edges:
        if a == b:
            continue
        if u == a:
            total += count_paths_brute(g, b, v, k - 1)
        elif u == b:
            total += count_paths_brute(g, a, v, k - 1)
    return total


class TestAdjacency:
    def test_circle3_all_ones_off_diagonal(self):
        a = circle_graph(3).adjacency()
        assert np.array_equal(a, np.ones((3, 3)) - np.eye(3))

    def test_single_vertex(self):
        assert Graph(["v"], []).adjacency().shape == (1, 1)
        assert Graph(["v"], []).adjacency()[0, 0] == 0

    def test_parallel_edges_counted(self):
        g = Graph(["a", "b"], [("a", "b"), ("a", "b")])
        assert g.adjacency()[0, 1] == 2

    def test_loop_leaves_diagonal_zero(self):
        g = Graph(["a"], [("a", "a")])
        assert g.adjacency()[0, 0] == 0
        assert g.laplacian()[0, 0] == 0
        assert g.valence("a") == 0
        assert g.raw_valence("a") == 2


class TestLaplacian:
    def test_line3_matches_table(self):
        lap = line_graph(3).laplacian()
        assert np.array_equal(lap, np.array([[1, -1, 0], [-1, 2, -1], [0, -1, 1]]))

    def test_equals_incidence_gram_on_corpus(self, graph_corpus):
        for g in graph_corpus:
            d = incidence_matrix(g)
            assert np.array_equal(g.laplacian(), (d.T @ d).astype(int))

    def test_grid_fragment_incidence_oracle(self):
        g = grid_graph(4, 4)
        d = incidence_matrix(g)
        assert np.array_equal(g.laplacian(), (d.T @ d).astype(int))

    def test_psd_and_zero_row_sums(self, graph_corpus):
        for g in graph_corpus:
            lap = g.laplacian().astype(float)
            assert np.linalg.eigvalsh(lap)[0] > -1e-12
            loop_free = all(a != b for a, b in g.edges)
            if loop_free:
                assert np.abs(lap.sum(axis=1)).max() == 0


class TestKinetic:
    def test_line3_m2_one(self):
        k = kinetic(line_graph(3), 1.0)
        assert np.allclose(k, [[2, -1, 0], [-1, 3, -1], [0, -1, 2]])

    def test_edgeless_graph(self):
        k = kinetic(Graph(["a", "b"], []), 0.7)
        assert np.allclose(k, 0.7 * np.eye(2))

    def test_eigenvalues_bounded_below_by_mass(self):
        k = kinetic(circle_graph(5), 0.3)
        assert np.linalg.eigvalsh(k)[0] >= 0.3 - 1e-12

    @pytest.mark.parametrize("m2", [0.0, -1.0])
    def test_rejects_nonpositive_mass(self, m2):
        with pytest.raises(NonPositiveMass):
            kinetic(line_graph(2), m2)


class TestPathCountOracle:
    def test_adjacency_powers_count_paths(self, rng):
        for _ in range(8):
            g = random_multigraph(rng, n_max=5)
            a = g.adjacency()
            for k in range(0, 5):
                ak = np.linalg.matrix_power(a, k)
                u, v = g.vertices[0], g.vertices[-1]
                assert ak[g.index(u), g.index(v)] == count_paths_brute(g, u, v, k)


class TestBlockIndices:
    def test_line3_one_end(self):
        g = line_graph(3)
        bulk, bdry = block_indices(BoundaryMarking(g, ["3"]))
        assert bulk == [0, 1] and bdry == [2]

    def test_empty_marking_all_bulk(self):
        g = line_graph(3)
        bulk, bdry = block_indices(BoundaryMarking(g, []))
        assert bulk == [0, 1, 2] and bdry == []

    def test_full_marking_empty_bulk(self):
        g = line_graph(3)
        bulk, bdry = block_indices(BoundaryMarking(g, g.vertices, g.edges))
        assert bulk == [] and len(bdry) == 3


class TestMarkingValidation:
    def test_edge_needs_marked_endpoints(self):
        g = line_graph(3)
        with pytest.raises(GraphQFTError):
            BoundaryMarking(g, ["1"], [("1", "2")])

    def test_marked_edges_bounded_by_multiplicity(self):
        g = Graph(["a", "b"], [("a", "b")])
        with pytest.raises(GraphQFTError):
            BoundaryMarking(g, ["a", "b"], [("a", "b"), ("a", "b")])

    def test_boundary_loops_accepted(self):
        g = Graph(["a", "b"], [("a", "a"), ("a", "b")])
        mk = BoundaryMarking(g, ["a"], [("a", "a")])
        assert mk.subgraph().loop_count("a") == 1


class TestGlue:
    def test_two_segments_make_line3(self):
        l2 = line_graph(2)
        spec = GluingSpec(BoundaryMarking(l2, ["2"]), BoundaryMarking(l2, ["1"]), {"2": "1"})
        res = glue(spec)
        assert res.graph.n == 3
        assert len(res.graph.edges) == 2
        degs = sorted(res.graph.valence(v) for v in res.graph.vertices)
        assert degs == [1, 1, 2]

    def test_gluing_whole_marked_graph_is_idempotent(self):
        y = circle_graph(3)
        mk = BoundaryMarking(y, y.vertices, y.edges)
        spec = GluingSpec(mk, mk, {v: v for v in y.vertices})
        res = glue(spec)
        assert res.graph == y

    def test_two_intervals_make_circle(self):
        n1, n2 = 4, 5
        g1, g2 = line_graph(n1), line_graph(n2)
        spec = GluingSpec(
            BoundaryMarking(g1, [g1.vertices[0], g1.vertices[-1]]),
            BoundaryMarking(g2, [g2.vertices[0], g2.vertices[-1]]),
            {g1.vertices[0]: g2.vertices[0], g1.vertices[-1]: g2.vertices[-1]},
        )
        res = glue(spec)
        assert res.graph.n == n1 + n2 - 2
        assert all(res.graph.valence(v) == 2 for v in res.graph.vertices)

    def test_vertex_and_edge_counts(self, rng):
        from graphqft.acceptance import random_split

        for _ in range(10):
            spec = random_split(rng, max_vertices=10)
            res = glue(spec)
            nl, nr = spec.left.graph.n, spec.right.graph.n
            ny = len(spec.left.boundary_vertices)
            assert res.graph.n == nl + nr - ny
            assert len(res.graph.edges) == len(spec.left.graph.edges) + len(
                spec.right.graph.edges
            ) - len(spec.left.boundary_edges)

    def test_identification_must_be_isomorphism(self):
        g1 = Graph(["a", "b", "c"], [("a", "b")])
        g2 = Graph(["x", "y", "z"], [("x", "y")])
        mk1 = BoundaryMarking(g1, ["a", "b"], [("a", "b")])
        mk2 = BoundaryMarking(g2, ["x", "y"])
        with pytest.raises(IdentificationMismatch):
            GluingSpec(mk1, mk2, {"a": "x", "b": "y"})


class TestSelfGlue:
    def test_line3_endpoints_make_double_edge_circle(self):
        l3 = line_graph(3)
        res = self_glue(
            l3, BoundaryMarking(l3, ["1"]), BoundaryMarking(l3, ["3"]), {"1": "3"}
        )
        assert res.graph.n == 2
        assert res.graph.edges == (("1", "2"), ("1", "2"))

    @pytest.mark.parametrize("n", [4, 6, 9])
    def test_line_n_endpoints_make_circle(self, n):
        g = line_graph(n)
        res = self_glue(
            g,
            BoundaryMarking(g, [g.vertices[0]]),
            BoundaryMarking(g, [g.vertices[-1]]),
            {g.vertices[0]: g.vertices[-1]},
        )
        assert res.graph.n == n - 1
        assert all(res.graph.valence(v) == 2 for v in res.graph.vertices)

    def test_crossing_pairs_collapse_to_parallel_edges(self):
        # two columns joined by crossing diagonals collapse to a double edge
        g = Graph(
            ["a0", "a1", "b0", "b1", "c0", "c1"],
            [("a0", "b0"), ("a1", "b1"), ("b0", "c1"), ("b1", "c0")],
        )
        res = self_glue(
            g,
            BoundaryMarking(g, ["b0", "b1"]),
            BoundaryMarking(g, ["c0", "c1"]),
            {"b0": "c0", "b1": "c1"},
        )
        assert res.graph.n == 4
        assert res.graph.edge_multiset()[("b0", "b1")] == 2
        assert sorted(res.marking.boundary_vertices) == ["b0", "b1"]
        assert res.marking.boundary_edges == (("b0", "b1"), ("b0", "b1"))

    def test_direct_edge_between_partners_becomes_loop(self):
        g = Graph(["a", "b"], [("a", "b")])
        res = self_glue(g, BoundaryMarking(g, ["a"]), BoundaryMarking(g, ["b"]), {"a": "b"})
        assert res.graph.vertices == ("a",)
        assert res.graph.edges == (("a", "a"),)

    def test_overlapping_markings_rejected(self):
        g = line_graph(3)
        with pytest.raises(OverlappingMarkings):
            self_glue(g, BoundaryMarking(g, ["1", "2"]), BoundaryMarking(g, ["2"]), {})


class TestCobordism:
    def test_disjointness_enforced(self):
        g = line_graph(3)
        with pytest.raises(OverlappingMarkings):
            Cobordism(g, BoundaryMarking(g, ["1"]), BoundaryMarking(g, ["1", "3"]))


class TestJson:
    def test_round_trip_is_byte_identical(self):
        g = Graph(["b", "a", "c"], [("a", "b"), ("a", "b"), ("c", "c")])
        mk = BoundaryMarking(g, ["a", "b"], [("a", "b")])
        text = dumps(g, mk)
        g2, mk2 = loads(text)
        assert dumps(g2, mk2) == text

    def test_format_fields(self):
        obj = json.loads(dumps(line_graph(2)))
        assert obj == {"vertices": ["1", "2"], "edges": [["1", "2"]]}

    def test_repeated_pairs_and_loops(self):
        g, _ = loads('{"vertices": ["a", "b"], "edges": [["a","b"],["a","b"],["a","a"]]}')
        assert g.adjacency()[0, 1] == 2
        assert g.loop_count("a") == 1
