import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from graphqft import gaussian as ga
from graphqft import linalg as la
from graphqft import paths as pp
from graphqft import series as se
from graphqft.graphs import (
    BoundaryMarking,
    Graph,
    circle_graph,
    grid_boundary_marking,
    grid_graph,
    kinetic,
    line_graph,
)


class TestHSeriesGreen:
    def test_circle3_coefficients(self):
        # orders of m^-2(k+1) for the (1,2) entry: 0, 1, -3, 9
        res = se.h_series_green(circle_graph(3), 1.0, 3)
        coeffs = [term[0, 1] for term in res.per_order]
        assert coeffs == pytest.approx([0.0, 1.0, -3.0, 9.0])

    def test_edgeless_graph_truncates_to_leading_term(self):
        g = Graph(["a", "b"], [])
        res = se.h_series_green(g, 2.0, 10)
        assert np.allclose(res.value, np.eye(2) / 2.0)

    def test_convergent_case_matches_inverse(self):
        g, m2 = circle_graph(3), 5.0
        res = se.h_series_green(g, m2, 60)
        assert not res.report.divergent
        assert np.abs(res.value - la.inverse(kinetic(g, m2))).max() < 1e-10

    def test_divergence_reported_not_raised(self):
        res = se.h_series_green(circle_graph(3), 1.0, 5)
        assert res.report.divergent


class TestSeriesGreen:
    def test_single_vertex(self):
        g = Graph(["v"], [])
        res = se.series_green(g, 4.0)
        assert res.value[0, 0] == pytest.approx(0.25)
        assert res.report.orders_used == 0

    def test_line3_endpoint_series_value(self):
        # the weighted path series between the two endpoints resums to the
        # closed form sum_l 2^(l-1)/((1+m2)^(l+1)(2+m2)^l)
        m2 = 1.0
        res = se.series_green(line_graph(3), m2, 1e-14)
        closed = sum(
            2 ** (l - 1) / (1 + m2) ** (l + 1) / (2 + m2) ** l for l in range(1, 60)
        )
        assert res.value[0, 2] == pytest.approx(closed, abs=1e-13)
        assert res.value[0, 2] == pytest.approx(1 / (m2 * (1 + m2) * (3 + m2)), abs=1e-13)

    def test_matches_inverse_on_corpus(self, graph_corpus):
        for g in graph_corpus:
            res = se.series_green(g, 0.5, 1e-12)
            assert np.abs(res.value - la.inverse(kinetic(g, 0.5))).max() < 2e-12
            assert res.report.tail_bound < 1e-12

    def test_partial_sums_monotone_and_bounded(self):
        g, m2 = circle_graph(4), 0.4
        lam = m2 + g.valence_vector().astype(float)
        b = g.adjacency().astype(float) / lam[:, None]
        lam_inv = np.diag(1.0 / lam)
        exact = la.inverse(kinetic(g, m2))
        acc = np.array(lam_inv)
        power = np.eye(g.n)
        for _ in range(60):
            power = power @ b
            nxt = acc + power @ lam_inv
            assert np.all(nxt >= acc - 1e-16)
            assert np.all(nxt <= exact + 1e-12)
            acc = nxt

    def test_resummation_agrees_with_h_series(self):
        g, m2 = circle_graph(3), 5.0
        a = se.series_green(g, m2, 1e-12).value
        b = se.h_series_green(g, m2, 200).value
        assert np.abs(a - b).max() < 1e-9


class TestSeriesLogDet:
    def test_edgeless_graph_is_zero(self):
        g = Graph(["a", "b"], [])
        assert se.series_log_det(g, 1.0).value == 0.0

    def test_recovers_log_det(self, graph_corpus):
        for g in graph_corpus[:10]:
            for m2 in (0.3, 1.0, 3.0):
                val = se.log_det_kinetic_from_series(g, m2, 1e-12)
                assert val == pytest.approx(la.logdet(kinetic(g, m2)), abs=2e-12)

    def test_traces_match_cycle_enumeration(self):
        # per-order traces equal the sum of w' over closed paths, i.e. the
        # cycle-class sum of w'/t times the orbit sizes
        g, m2 = line_graph(3), 1.0
        res = se.series_log_det(g, m2, 1e-14)
        for k in range(1, 7):
            total = Fraction(0)
            m2f = Fraction(1)
            for v in g.vertices:
                for p in pp.enumerate_paths(g, v, v, k):
                    if p.length == k:
                        total += pp.w_prime_weight(p, m2f)
            assert res.per_order[k - 1] == pytest.approx(float(total), abs=1e-13)

    def test_circle3_cycle_coefficients(self):
        # log det of the normalized operator has coefficients -(0,3,2,9/2)
        # in powers of 1/(m2+2); verified through the trace sequence
        g = circle_graph(3)
        m2 = 7.0  # any value; traces of (A/alpha)^k give alpha^-k coefficients
        res = se.series_log_det(g, m2, 1e-14)
        alpha = m2 + 2.0
        coeffs = [res.per_order[k - 1] / alpha**-k / k for k in range(1, 5)]
        assert coeffs == pytest.approx([0.0, 3.0, 2.0, 4.5])


class TestHSeriesLogDet:
    def test_circle3_orders(self):
        res = se.h_series_log_det(circle_graph(3), 1.0, 3)
        assert res.per_order[0] == pytest.approx(6.0)
        assert res.per_order[1] == pytest.approx(-9.0)
        assert res.per_order[2] == pytest.approx(18.0)

    def test_line3_orders(self):
        res = se.h_series_log_det(line_graph(3), 1.0, 2)
        assert res.per_order[0] == pytest.approx(4.0)
        assert res.per_order[1] == pytest.approx(-5.0)

    def test_partial_sum_converges(self):
        g, m2 = circle_graph(4), 6.0
        res = se.h_series_log_det(g, m2, 80)
        ref = math.log(la.det(kinetic(g, m2)) / m2**4)
        assert res.value == pytest.approx(ref, abs=1e-9)


class TestSeriesRelative:
    def test_two_vertex_dprime_and_dn(self):
        m2 = 1.0
        l2 = line_graph(2)
        rel = se.series_relative(l2, BoundaryMarking(l2, ["2"]), m2, 1e-13)
        assert rel.dn[0, 0] == pytest.approx(m2 * (2 + m2) / (1 + m2), abs=1e-12)
        # D' = 1 - DN/m2 = -1/(m2+1)
        dprime = 1.0 - rel.dn[0, 0] / m2
        assert dprime == pytest.approx(-1.0 / (m2 + 1), abs=1e-12)

    def test_line4_both_ends(self):
        m2 = 1.0
        g = line_graph(4)
        rel = se.series_relative(g, BoundaryMarking(g, ["1", "4"]), m2, 1e-13)
        assert rel.dn[0, 0] == pytest.approx(m2 + 1 - (m2 + 2) / ((m2 + 1) * (m2 + 3)), abs=1e-11)
        assert rel.dn[0, 1] == pytest.approx(-1 / ((m2 + 1) * (m2 + 3)), abs=1e-11)

    def test_quasi_regular_grid_pair_vs_schur(self):
        g = grid_graph(4, 5)
        mk = grid_boundary_marking(g, 4, 5)
        # interior vertices all have valence 4 in the host graph
        assert {g.valence(v) for v in g.vertices if v not in mk.boundary_vertices} == {4}
        m2 = 1.0
        rel = se.series_relative(g, mk, m2, 1e-12)
        oracle = ga.relative_data(g, mk, m2)
        assert np.abs(rel.propagator - oracle.propagator).max() < 1e-11
        assert np.abs(rel.dn - oracle.dn).max() < 1e-10
        assert np.abs(rel.ext - oracle.ext).max() < 1e-11
        lam = np.prod([m2 + g.valence(v) for v in rel.bulk_vertices])
        assert math.exp(rel.log_det_normalized) * lam == pytest.approx(
            oracle.det_k_rel, rel=1e-10
        )

    def test_empty_bulk(self):
        g = line_graph(2)
        rel = se.series_relative(g, BoundaryMarking(g, ["1", "2"], [("1", "2")]), 1.0)
        assert rel.propagator.shape == (0, 0)
        assert np.allclose(rel.dn, kinetic(g, 1.0))


class TestHeatWeights:
    def test_constant_path(self):
        assert se.heat_weight((3,), 0.4) == pytest.approx(math.exp(-1.2))

    def test_single_step_distinct_rates(self):
        t = 0.6
        ref = (math.exp(-t * 1) - math.exp(-t * 2)) / (2 - 1)
        assert se.heat_weight((1, 2), t) == pytest.approx(ref, rel=1e-14)

    def test_equal_rates_reduce_to_poisson_factor(self):
        t, k, n = 0.8, 5, 3
        ref = math.exp(-t * n) * t**k / math.factorial(k)
        assert se.heat_weight((n,) * (k + 1), t) == pytest.approx(ref, rel=1e-13)

    def test_simplex_quadrature_oracle(self):
        # two-step path with valences (1, 2, 1): brute-force the simplex
        from scipy.integrate import dblquad

        t = 0.5
        val, _ = dblquad(
            lambda t2, t1: math.exp(-((t - t1 - t2) * 1 + t1 * 2 + t2 * 1)),
            0,
            t,
            0,
            lambda t1: t - t1,
        )
        assert se.heat_weight((1, 2, 1), t) == pytest.approx(val, rel=1e-9)

    def test_mass_folds_into_rates(self):
        t, m2 = 0.3, 1.5
        assert se.heat_weight((1, 2), t, m2) == pytest.approx(
            math.exp(-t * m2) * se.heat_weight((1, 2), t), rel=1e-13
        )

    def test_matches_explicit_path_enumeration(self):
        g, t = line_graph(3), 0.7
        oracle = la.expm(g.laplacian().astype(float), t)
        for u, v in (("1", "3"), ("2", "2")):
            total = sum(
                se.heat_weight(tuple(g.valence(w) for w in p.vertices), t)
                for p in pp.enumerate_paths(g, u, v, 14)
            )
            assert total == pytest.approx(oracle[g.index(u), g.index(v)], abs=1e-9)


class TestHeatKernelPathSum:
    @pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
    def test_regular_circle_vs_expm(self, t):
        g = circle_graph(4)
        oracle = la.expm(g.laplacian().astype(float), t)
        for u in g.vertices:
            for v in g.vertices:
                val = se.heat_kernel_path_sum(g, u, v, t, 30)
                assert val == pytest.approx(oracle[g.index(u), g.index(v)], abs=1e-10)

    @pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
    def test_irregular_line_vs_expm(self, t):
        g = line_graph(3)
        oracle = la.expm(g.laplacian().astype(float), t)
        for u in g.vertices:
            for v in g.vertices:
                val = se.heat_kernel_path_sum(g, u, v, t, 30)
                assert val == pytest.approx(oracle[g.index(u), g.index(v)], abs=1e-8)

    def test_with_mass_matches_kinetic_heat_kernel(self):
        g, m2, t = line_graph(3), 0.7, 0.5
        oracle = ga.heat_kernel(g, m2, t)
        val = se.heat_kernel_path_sum(g, "1", "2", t, 30, m2)
        assert val == pytest.approx(oracle[0, 1], abs=1e-10)


class TestPathGluingCheck:
    def test_line3_middle_marking(self):
        l3 = line_graph(3)
        rep = se.path_gluing_check(l3, BoundaryMarking(l3, ["2"]), max_order=5)
        assert rep.decomposition_ok and rep.trace_identity_ok
        assert rep.detail == {}

    def test_empty_marking_degenerates(self):
        l3 = line_graph(3)
        rep = se.path_gluing_check(l3, BoundaryMarking(l3, []), max_order=4)
        assert rep.decomposition_ok and rep.trace_identity_ok

    def test_circle4_trace_identity(self):
        c4 = circle_graph(4)
        rep = se.path_gluing_check(c4, BoundaryMarking(c4, ["1"]), max_order=4)
        assert rep.trace_identity_ok

    def test_two_point_marking(self):
        c4 = circle_graph(4)
        rep = se.path_gluing_check(c4, BoundaryMarking(c4, ["1", "3"]), max_order=4)
        assert rep.decomposition_ok and rep.trace_identity_ok
