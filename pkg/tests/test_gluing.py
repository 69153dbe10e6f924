import math

import numpy as np
import pytest
from numpy.polynomial.hermite import hermgauss

from graphqft import closedforms as cf
from graphqft import gaussian as ga
from graphqft import gluing as gl
from graphqft import linalg as la
from graphqft.acceptance import random_split
from graphqft.errors import BoundaryMismatch
from graphqft.graphs import (
    BoundaryMarking,
    Cobordism,
    GluingSpec,
    Graph,
    circle_graph,
    glue,
    kinetic,
    line_graph,
)


def two_segment_spec():
    l2 = line_graph(2)
    return GluingSpec(BoundaryMarking(l2, ["2"]), BoundaryMarking(l2, ["1"]), {"2": "1"})


class TestGluePropagator:
    @pytest.mark.parametrize("m2", [0.3, 1.0, 2.5])
    def test_worked_two_segment_example(self, m2):
        spec = two_segment_spec()
        left = ga.relative_data(spec.left.graph, spec.left, m2)
        right = ga.relative_data(spec.right.graph, spec.right, m2)
        glued = gl.glue_propagator(left, right, spec)
        g = glued.result.graph
        i1, imid, i3 = g.index("1"), g.index("2"), g.index("R.2")
        det_ref = m2 * (1 + m2) * (3 + m2)
        assert glued.det_k == pytest.approx(det_ref, rel=1e-12)
        assert glued.propagator[i1, i1] == pytest.approx((1 + 3 * m2 + m2**2) / det_ref, rel=1e-11)
        assert glued.propagator[i1, i3] == pytest.approx(1.0 / det_ref, rel=1e-11)
        assert glued.propagator[imid, imid] == pytest.approx((1 + m2) ** 2 / det_ref, rel=1e-11)

    def test_glue_nothing_returns_absolute(self):
        # the right side is the marked subgraph itself
        m2 = 0.9
        l3 = line_graph(3)
        left_mk = BoundaryMarking(l3, ["3"])
        y = Graph(["3"], [])
        spec = GluingSpec(left_mk, BoundaryMarking(y, ["3"]), {"3": "3"})
        left = ga.relative_data(l3, left_mk, m2)
        right = ga.relative_data(y, BoundaryMarking(y, ["3"]), m2)
        glued = gl.glue_propagator(left, right, spec)
        direct = ga.gaussian_data(l3, m2)
        assert np.abs(glued.propagator - direct.propagator).max() < 1e-12

    def test_random_trees_at_leaf(self, rng):
        m2 = 0.7
        t1 = Graph(["a", "b", "c", "y"], [("a", "b"), ("b", "y"), ("c", "b")])
        t2 = Graph(["y", "p", "q"], [("y", "p"), ("p", "q")])
        spec = GluingSpec(BoundaryMarking(t1, ["y"]), BoundaryMarking(t2, ["y"]), {"y": "y"})
        rep = gl.glue_check(spec, m2)
        assert rep.max_propagator_residual < 1e-9
        assert rep.det_residual < 1e-9

    def test_total_dn_symmetric_positive_definite(self, rng):
        for _ in range(10):
            spec = random_split(rng)
            m2 = 0.6
            left = ga.relative_data(spec.left.graph, spec.left, m2)
            right = ga.relative_data(spec.right.graph, spec.right, m2)
            dn, _ = gl.total_dn_operator(left, right, spec)
            assert np.array_equal(dn, dn.T)
            assert np.linalg.eigvalsh(dn)[0] > 0

    def test_mass_mismatch_rejected(self):
        spec = two_segment_spec()
        left = ga.relative_data(spec.left.graph, spec.left, 1.0)
        right = ga.relative_data(spec.right.graph, spec.right, 2.0)
        with pytest.raises(BoundaryMismatch):
            gl.glue_propagator(left, right, spec)


class TestGlueDeterminant:
    @pytest.mark.parametrize("m2", [0.4, 1.0])
    def test_two_segment_product_formula(self, m2):
        spec = two_segment_spec()
        left = ga.relative_data(spec.left.graph, spec.left, m2)
        right = ga.relative_data(spec.right.graph, spec.right, m2)
        det = gl.glue_determinant(left, right, spec)
        assert det == pytest.approx(m2 * (1 + m2) * (3 + m2), rel=1e-12)

    def test_circle_from_two_intervals(self):
        m2 = 1.0
        n1, n2 = 4, 5
        g1, g2 = line_graph(n1), line_graph(n2)
        mk1 = BoundaryMarking(g1, [g1.vertices[0], g1.vertices[-1]])
        mk2 = BoundaryMarking(g2, [g2.vertices[0], g2.vertices[-1]])
        spec = GluingSpec(
            mk1, mk2, {g1.vertices[0]: g2.vertices[0], g1.vertices[-1]: g2.vertices[-1]}
        )
        det = gl.glue_determinant(
            ga.relative_data(g1, mk1, m2), ga.relative_data(g2, mk2, m2), spec
        )
        assert det == pytest.approx(cf.circle_det(n1 + n2 - 2, m2), rel=1e-11)
        # the same value assembled from the printed closed forms
        dn1 = cf.line_rel_both_ends_dn(n1, m2)
        dn2 = cf.line_rel_both_ends_dn(n2, m2)
        det_ref = (
            cf.line_rel_both_ends_det(n1, m2)
            * cf.line_rel_both_ends_det(n2, m2)
            * la.det(dn1 + dn2 - m2 * np.eye(2))
        )
        assert det == pytest.approx(det_ref, rel=1e-11)

    def test_random_separator_split(self, rng):
        for _ in range(20):
            spec = random_split(rng, max_vertices=8, max_y=2)
            rep = gl.glue_check(spec, 0.7)
            assert rep.det_residual < 1e-9


class TestComposition:
    def _line_cobordism(self, n, m2):
        g = line_graph(n)
        c = Cobordism(
            g, BoundaryMarking(g, [g.vertices[0]]), BoundaryMarking(g, [g.vertices[-1]])
        )
        return gl.cobordism_data(c, m2), c

    def test_empty_ends_reduce_to_plain_gluing(self):
        m2 = 1.1
        l2 = line_graph(2)
        c1 = Cobordism(l2, BoundaryMarking(l2, []), BoundaryMarking(l2, ["2"]))
        c2 = Cobordism(l2, BoundaryMarking(l2, ["1"]), BoundaryMarking(l2, []))
        comp = gl.compose_cobordisms(
            gl.cobordism_data(c1, m2), gl.cobordism_data(c2, m2), {"2": "1"}
        )
        spec = two_segment_spec()
        left = ga.relative_data(l2, spec.left, m2)
        right = ga.relative_data(l2, spec.right, m2)
        glued = gl.glue_propagator(left, right, spec)
        assert comp.det_k_rel * la.det(comp.dn) if comp.dn.size else True
        # no outer boundary: the composed propagator covers the whole graph
        perm = [glued.result.graph.index(v) for v in comp.bulk_vertices]
        assert np.abs(comp.propagator - glued.propagator[np.ix_(perm, perm)]).max() < 1e-11
        assert comp.det_k_rel == pytest.approx(glued.det_k, rel=1e-11)

    @pytest.mark.parametrize("m2", [0.5, 1.0])
    def test_two_line_cobordisms_match_closed_forms(self, m2):
        d1, c1 = self._line_cobordism(3, m2)
        d2, c2 = self._line_cobordism(4, m2)
        comp = gl.compose_cobordisms(d1, d2, {c1.graph.vertices[-1]: c2.graph.vertices[0]})
        n = 3 + 4 - 1
        ref_dn = cf.line_rel_both_ends_dn(n, m2)
        assert np.abs(comp.dn - ref_dn).max() < 1e-10
        assert comp.det_k_rel == pytest.approx(cf.line_rel_both_ends_det(n, m2), rel=1e-10)
        ref_e = cf.line_rel_both_ends_extension(n, m2)
        # composite bulk rows are ordered left-bulk, interface, right-bulk
        order = np.argsort([int(v.replace("R.", "")) + (10 if v.startswith("R.") else 0) for v in comp.bulk_vertices])
        assert np.abs(comp.ext[order] - ref_e).max() < 1e-10

    def test_associativity(self, rng):
        m2 = 0.9
        d1, c1 = self._line_cobordism(3, m2)
        d2, c2 = self._line_cobordism(3, m2)
        d3, c3 = self._line_cobordism(4, m2)

        ab = gl.compose_cobordisms(d1, d2, {"3": "1"})
        ab_cob = gl.composed_cobordism(c1, c2, {"3": "1"})
        ab_data = gl.cobordism_data(ab_cob, m2)
        abc_left = gl.compose_cobordisms(
            ab_data, d3, {ab_cob.out_marking.sorted_vertices[0]: "1"}
        )

        bc_cob = gl.composed_cobordism(c2, c3, {"3": "1"})
        bc_data = gl.cobordism_data(bc_cob, m2)
        abc_right = gl.compose_cobordisms(d1, bc_data, {"3": bc_cob.in_marking.sorted_vertices[0]})

        assert np.abs(abc_left.dn - abc_right.dn).max() < 1e-9
        assert abc_left.det_k_rel == pytest.approx(abc_right.det_k_rel, rel=1e-9)

    def test_functorial_kernel_composition_by_quadrature(self):
        # integrating the product of two cobordism kernels over the interface
        # field reproduces the composite kernel
        m2, hbar = 1.0, 0.7
        d1, c1 = self._line_cobordism(2, m2)
        d2, c2 = self._line_cobordism(3, m2)
        glued = gl.composed_cobordism(c1, c2, {"2": "1"})
        direct = ga.relative_data(glued.graph, glued.boundary_marking(), m2)

        def kernel(rel, phi_pair):
            return ga.gaussian_rel_z(rel, np.asarray(phi_pair), hbar)

        phi1, phi3 = 0.6, -0.4
        x, w = hermgauss(80)
        width = math.sqrt(2.0 * hbar / (m2 + 2.0))
        total = 0.0
        for xi, wi in zip(x, w):
            phi2 = width * xi
            total += (
                wi
                * math.exp(xi * xi)
                * kernel(d1.rel, [phi1, phi2])
                * kernel(d2.rel, [phi2, phi3])
            )
        total *= width / math.sqrt(2 * math.pi * hbar)
        # boundary order of the composite is sorted ids: ['1', 'R.3']
        ref = kernel(direct, [phi1, phi3])
        assert total == pytest.approx(ref, rel=1e-9)


class TestSelfGluing:
    @pytest.mark.parametrize("m2", [0.5, 1.0, 3.0])
    def test_line3_dn_value(self, m2):
        l3 = line_graph(3)
        dn, res, resid = gl.self_glue_dn(
            l3, BoundaryMarking(l3, ["1"]), BoundaryMarking(l3, ["3"]), {"1": "3"}, m2
        )
        assert resid < 1e-12
        assert dn[0, 0] == pytest.approx(m2 * (m2 + 4) / (m2 + 2), rel=1e-12)
        assert res.graph.n == 2

    @pytest.mark.parametrize("n", [3, 7, 12, 20])
    def test_line_n_tanh_identity(self, n):
        m2 = 1.0
        b = cf.beta_of_m2(m2)
        g = line_graph(n)
        dn, _, resid = gl.self_glue_dn(
            g,
            BoundaryMarking(g, [g.vertices[0]]),
            BoundaryMarking(g, [g.vertices[-1]]),
            {g.vertices[0]: g.vertices[-1]},
            m2,
        )
        assert resid < 1e-10
        assert dn[0, 0] == pytest.approx(2 * math.sinh(b) * math.tanh(b * (n - 1) / 2), abs=1e-11)

    def test_random_pair_of_leaves(self, rng):
        # two isomorphic single-vertex markings hanging off a random core
        core = Graph(
            ["c0", "c1", "c2", "u", "w"],
            [("c0", "c1"), ("c1", "c2"), ("c0", "c2"), ("c0", "u"), ("c1", "w")],
        )
        dn, _, resid = gl.self_glue_dn(
            core, BoundaryMarking(core, ["u"]), BoundaryMarking(core, ["w"]), {"u": "w"}, 0.8
        )
        assert resid < 1e-10


class TestTraceFormula:
    def test_line3_both_sides(self):
        m2 = 1.0
        l3 = line_graph(3)
        rep = gl.trace_formula_check(
            l3, BoundaryMarking(l3, ["1"]), BoundaryMarking(l3, ["3"]), {"1": "3"}, m2
        )
        assert rep.lhs == pytest.approx((m2 * (m2 + 4)) ** -0.5, rel=1e-12)
        assert rep.residual < 1e-12

    def test_hbar_independence(self):
        l3 = line_graph(3)
        rep = gl.trace_formula_check(
            l3,
            BoundaryMarking(l3, ["1"]),
            BoundaryMarking(l3, ["3"]),
            {"1": "3"},
            0.7,
            hbars=(0.1, 1.0, 10.0),
        )
        vals = list(rep.rhs_by_hbar.values())
        assert max(vals) - min(vals) < 1e-12 * max(vals)

    def test_random_instance(self, rng):
        g = Graph(
            ["a", "b", "u", "w"],
            [("a", "b"), ("a", "u"), ("b", "w"), ("a", "b")],
        )
        rep = gl.trace_formula_check(
            g, BoundaryMarking(g, ["u"]), BoundaryMarking(g, ["w"]), {"u": "w"}, 1.3
        )
        assert rep.residual / rep.lhs < 1e-9
