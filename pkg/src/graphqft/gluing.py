"""Assembly of whole-graph Gaussian data from Dirichlet data of pieces.

Propagators and determinants of a glued graph X = X' u_Y X'' are rebuilt
from the relative data of the two sides, a glued cobordism's data from its
constituents, and self-gluings are checked through the pulled-back DN
quadratic form and the trace formula.  Verification entry points return
structured reports (lhs, rhs, residual) rather than booleans.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import BoundaryMismatch
from .gaussian import RelativeGaussianData, gaussian_data, relative_data
from .graphs import (
    BoundaryMarking,
    Cobordism,
    GlueResult,
    GluingSpec,
    Graph,
    SelfGlueResult,
    glue,
    kinetic,
    self_glue,
)


@dataclass(frozen=True)
class GluedData:
    """Reconstructed whole-graph data with provenance back to the pieces."""

    result: GlueResult
    total_dn: np.ndarray
    propagator: np.ndarray
    det_k: float
    y_vertices: tuple[str, ...]


def _padded_blocks(
    rel: RelativeGaussianData, vertex_map: dict[str, str], glued: Graph, y_order: tuple[str, ...]
) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Zero-padded propagator and identity-padded extension operator of one
    side, as dense matrices indexed by the side's image in the glued graph.

    Returns (G-bar, E-bar, glued indices of the side's vertices).
    """
    side_vs = [vertex_map[v] for v in rel.graph.vertices]
    n = len(side_vs)
    g_bar = np.zeros((n, n))
    e_bar = np.zeros((n, len(y_order)))
    bulk_pos = {v: i for i, v in enumerate(rel.bulk_vertices)}
    y_pos = {vertex_map[v]: j for j, v in enumerate(rel.boundary_vertices)}
    for i, v in enumerate(rel.graph.vertices):
        for j, w in enumerate(rel.graph.vertices):
            if v in bulk_pos and w in bulk_pos:
                g_bar[i, j] = rel.propagator[bulk_pos[v], bulk_pos[w]]
    col = [y_pos[y] for y in y_order]
    for i, v in enumerate(rel.graph.vertices):
        if v in bulk_pos:
            e_bar[i, :] = rel.ext[bulk_pos[v], :][col]
        else:
            e_bar[i, y_order.index(vertex_map[v])] = 1.0
    idx = [glued.index(vertex_map[v]) for v in rel.graph.vertices]
    return g_bar, e_bar, idx


def total_dn_operator(
    left: RelativeGaussianData, right: RelativeGaussianData, spec: GluingSpec
) -> tuple[np.ndarray, tuple[str, ...]]:
    """DN_left + DN_right - K_Y on the identified boundary, ordered by the
    left marking's vertex ids."""
    if left.m2 != right.m2:
        raise BoundaryMismatch("the two sides carry different masses")
    y_order = tuple(sorted(spec.left.boundary_vertices))
    # Right DN rows/cols follow right ids; realign them to the left order.
    right_order = [spec.identification[v] for v in y_order]
    perm = [right.boundary_index(w) for w in right_order]
    dn_r = right.dn[np.ix_(perm, perm)]
    perm_l = [left.boundary_index(v) for v in y_order]
    dn_l = left.dn[np.ix_(perm_l, perm_l)]
    k_y = kinetic(spec.left.subgraph(), left.m2)
    return dn_l + dn_r - k_y, y_order


def glue_propagator(
    left: RelativeGaussianData, right: RelativeGaussianData, spec: GluingSpec
) -> GluedData:
    """Whole-graph propagator G = G-bar + E-bar DN_tot^-1 E-bar^T and the
    determinant product, assembled on the pushout graph."""
    res = glue(spec)
    dn_tot, y_order = total_dn_operator(left, right, spec)
    dn_inv = linalg.inverse(dn_tot)

    n = res.graph.n
    prop = np.zeros((n, n))
    gl, el, idx_l = _padded_blocks(left, res.left_map, res.graph, y_order)
    gr_, er, idx_r = _padded_blocks(right, res.right_map, res.graph, y_order)

    # Same-side contributions (Y entries appear in both; add the cut part once).
    prop[np.ix_(idx_l, idx_l)] += gl + el @ dn_inv @ el.T
    prop[np.ix_(idx_r, idx_r)] += gr_ + er @ dn_inv @ er.T
    # Cross contributions between strict bulks of the two sides.
    bulk_l = [res.graph.index(res.left_map[v]) for v in left.bulk_vertices]
    bulk_r = [res.graph.index(res.right_map[v]) for v in right.bulk_vertices]
    el_bulk = el[[left.graph.index(v) for v in left.bulk_vertices], :]
    er_bulk = er[[right.graph.index(v) for v in right.bulk_vertices], :]
    cross = el_bulk @ dn_inv @ er_bulk.T
    prop[np.ix_(bulk_l, bulk_r)] += cross
    prop[np.ix_(bulk_r, bulk_l)] += cross.T
    # Y-Y entries were added twice (once per side, both equal DN^-1): fix up.
    y_idx = [res.graph.index(v) for v in y_order]
    prop[np.ix_(y_idx, y_idx)] -= dn_inv

    det_k = left.det_k_rel * right.det_k_rel * linalg.det(dn_tot)
    return GluedData(res, dn_tot, 0.5 * (prop + prop.T), det_k, y_order)


def glue_determinant(
    left: RelativeGaussianData, right: RelativeGaussianData, spec: GluingSpec
) -> float:
    dn_tot, _ = total_dn_operator(left, right, spec)
    return left.det_k_rel * right.det_k_rel * linalg.det(dn_tot)


@dataclass(frozen=True)
class GlueCheckReport:
    max_propagator_residual: float
    det_lhs: float
    det_rhs: float
    det_residual: float

    def as_dict(self) -> dict:
        return {
            "max_propagator_residual": self.max_propagator_residual,
            "det_glued": self.det_lhs,
            "det_direct": self.det_rhs,
            "det_relative_residual": self.det_residual,
        }


def glue_check(spec: GluingSpec, m2: float) -> GlueCheckReport:
    """Compare glued propagator/determinant with direct computation on the
    pushout graph."""
    left = relative_data(spec.left.graph, spec.left, m2)
    right = relative_data(spec.right.graph, spec.right, m2)
    glued = glue_propagator(left, right, spec)
    direct = gaussian_data(glued.result.graph, m2)
    prop_res = float(np.abs(glued.propagator - direct.propagator).max())
    det_res = abs(glued.det_k - direct.det_k) / abs(direct.det_k)
    return GlueCheckReport(prop_res, glued.det_k, direct.det_k, det_res)


# ---------------------------------------------------------------------------
# Cobordism composition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CobordismData:
    """Relative Gaussian data of a cobordism, with in/out index bookkeeping."""

    cobordism: Cobordism
    rel: RelativeGaussianData

    @property
    def in_vertices(self) -> tuple[str, ...]:
        return self.cobordism.in_marking.sorted_vertices

    @property
    def out_vertices(self) -> tuple[str, ...]:
        return self.cobordism.out_marking.sorted_vertices

    def dn_block(self, rows: tuple[str, ...], cols: tuple[str, ...]) -> np.ndarray:
        ri = [self.rel.boundary_index(v) for v in rows]
        ci = [self.rel.boundary_index(v) for v in cols]
        return self.rel.dn[np.ix_(ri, ci)]

    def ext_block(self, cols: tuple[str, ...]) -> np.ndarray:
        ci = [self.rel.boundary_index(v) for v in cols]
        return self.rel.ext[:, ci]


def cobordism_data(c: Cobordism, m2: float) -> CobordismData:
    return CobordismData(c, relative_data(c.graph, c.boundary_marking(), m2))


@dataclass(frozen=True)
class ComposedData:
    """Data of a glued cobordism computed from its two constituents."""

    result: GlueResult
    dn: np.ndarray  # on Y1 u Y3, blocks ordered [Y1 | Y3]
    ext: np.ndarray  # rows: bulk of the glued cobordism, cols [Y1 | Y3]
    det_k_rel: float
    propagator: np.ndarray  # bulk x bulk of the glued cobordism
    bulk_vertices: tuple[str, ...]
    y1_vertices: tuple[str, ...]
    y3_vertices: tuple[str, ...]


def compose_cobordisms(
    left: CobordismData, right: CobordismData, identification: dict[str, str]
) -> ComposedData:
    """Glue out-boundary of ``left`` to in-boundary of ``right`` and compute
    the composite's DN, extension, determinant and propagator from the parts."""
    lc, rc = left.cobordism, right.cobordism
    spec = GluingSpec(lc.out_marking, rc.in_marking, identification)
    res = glue(spec)
    m2 = left.rel.m2
    if m2 != right.rel.m2:
        raise BoundaryMismatch("the two cobordisms carry different masses")

    y1 = lc.in_marking.sorted_vertices
    y2 = lc.out_marking.sorted_vertices  # interface, in left ids
    y2_right = tuple(identification[v] for v in y2)
    y3 = rc.out_marking.sorted_vertices

    dn_l_11 = left.dn_block(y1, y1)
    dn_l_12 = left.dn_block(y1, y2)
    dn_l_22 = left.dn_block(y2, y2)
    dn_r_22 = right.dn_block(y2_right, y2_right)
    dn_r_23 = right.dn_block(y2_right, y3)
    dn_r_33 = right.dn_block(y3, y3)

    k_y2 = kinetic(lc.out_marking.subgraph(), m2)
    dn_int = dn_l_22 + dn_r_22 - k_y2
    dn_int_inv = linalg.inverse(dn_int)

    dn = np.block(
        [
            [dn_l_11 - dn_l_12 @ dn_int_inv @ dn_l_12.T, -dn_l_12 @ dn_int_inv @ dn_r_23],
            [-dn_r_23.T @ dn_int_inv @ dn_l_12.T, dn_r_33 - dn_r_23.T @ dn_int_inv @ dn_r_23],
        ]
    )

    e_l_1 = left.ext_block(y1)
    e_l_2 = left.ext_block(y2)
    e_r_2 = right.ext_block(y2_right)
    e_r_3 = right.ext_block(y3)

    # Bulk rows of the composite: left strict bulk, interface Y2, right strict bulk.
    ext = np.block(
        [
            [e_l_1 - e_l_2 @ dn_int_inv @ dn_l_12.T, -e_l_2 @ dn_int_inv @ dn_r_23],
            [-dn_int_inv @ dn_l_12.T, -dn_int_inv @ dn_r_23],
            [-e_r_2 @ dn_int_inv @ dn_l_12.T, e_r_3 - e_r_2 @ dn_int_inv @ dn_r_23],
        ]
    )

    det_rel = left.rel.det_k_rel * right.rel.det_k_rel * linalg.det(dn_int)

    # Propagator on the composite bulk via the padded-block gluing formula,
    # the interface playing the role of Y.
    nb_l = len(left.rel.bulk_vertices)
    nb_r = len(right.rel.bulk_vertices)
    n2 = len(y2)
    g_l = left.rel.propagator
    g_r = right.rel.propagator
    eb_l = np.vstack([e_l_2, np.eye(n2)])  # left bulk + Y2, extension to Y2
    eb_r = np.vstack([np.eye(n2), e_r_2])  # Y2 + right bulk
    gb_l = np.zeros((nb_l + n2, nb_l + n2))
    gb_l[:nb_l, :nb_l] = g_l
    gb_r = np.zeros((n2 + nb_r, n2 + nb_r))
    gb_r[n2:, n2:] = g_r
    top = gb_l + eb_l @ dn_int_inv @ eb_l.T
    bot = gb_r + eb_r @ dn_int_inv @ eb_r.T
    cross = e_l_2 @ dn_int_inv @ e_r_2.T  # left bulk x right bulk
    prop = np.zeros((nb_l + n2 + nb_r, nb_l + n2 + nb_r))
    prop[: nb_l + n2, : nb_l + n2] += top
    prop[nb_l:, nb_l:] += bot
    prop[np.ix_(range(nb_l + n2, nb_l + n2 + nb_r), range(nb_l))] += cross.T
    prop[np.ix_(range(nb_l), range(nb_l + n2, nb_l + n2 + nb_r))] += cross
    prop[nb_l : nb_l + n2, nb_l : nb_l + n2] -= dn_int_inv  # added by both sides

    bulk_ids = (
        tuple(res.left_map[v] for v in left.rel.bulk_vertices)
        + tuple(res.left_map[v] for v in y2)
        + tuple(res.right_map[v] for v in right.rel.bulk_vertices)
    )
    y1_ids = tuple(res.left_map[v] for v in y1)
    y3_ids = tuple(res.right_map[v] for v in y3)
    return ComposedData(res, dn, ext, det_rel, 0.5 * (prop + prop.T), bulk_ids, y1_ids, y3_ids)


def composed_cobordism(left: Cobordism, right: Cobordism, identification: dict[str, str]) -> Cobordism:
    """The glued cobordism itself (for direct-computation oracles)."""
    spec = GluingSpec(left.out_marking, right.in_marking, identification)
    res = glue(spec)
    in_mk = BoundaryMarking(
        res.graph,
        [res.left_map[v] for v in left.in_marking.sorted_vertices],
        [(res.left_map[a], res.left_map[b]) for a, b in left.in_marking.boundary_edges],
    )
    out_mk = BoundaryMarking(
        res.graph,
        [res.right_map[v] for v in right.out_marking.sorted_vertices],
        [(res.right_map[a], res.right_map[b]) for a, b in right.out_marking.boundary_edges],
    )
    return Cobordism(res.graph, in_mk, out_mk)


# ---------------------------------------------------------------------------
# Self-gluing and the trace formula
# ---------------------------------------------------------------------------

def pulled_back_dn_form(
    g: Graph, y1: BoundaryMarking, y2: BoundaryMarking, f: dict[str, str], m2: float
) -> np.ndarray:
    """Quadratic form of DN_{Y,X} - K_{Y1}/2 - K_{Y2}/2 restricted to fields
    that agree on the two markings, as a matrix on the merged vertex set."""
    union = BoundaryMarking(
        g,
        y1.boundary_vertices | y2.boundary_vertices,
        y1.boundary_edges + y2.boundary_edges,
    )
    rel = relative_data(g, union, m2)
    order1 = y1.sorted_vertices
    idx1 = [rel.boundary_index(v) for v in order1]
    idx2 = [rel.boundary_index(f[v]) for v in order1]
    dn = rel.dn
    pulled = (
        dn[np.ix_(idx1, idx1)]
        + dn[np.ix_(idx1, idx2)]
        + dn[np.ix_(idx2, idx1)]
        + dn[np.ix_(idx2, idx2)]
    )
    k1 = kinetic(y1.subgraph(), m2)
    order2 = tuple(f[v] for v in order1)
    k2_native = kinetic(y2.subgraph(), m2)
    perm = [y2.sorted_vertices.index(w) for w in order2]
    k2 = k2_native[np.ix_(perm, perm)]
    return pulled - 0.5 * k1 - 0.5 * k2


def self_glue_dn(
    g: Graph, y1: BoundaryMarking, y2: BoundaryMarking, f: dict[str, str], m2: float
) -> tuple[np.ndarray, SelfGlueResult, float]:
    """Direct DN operator on the self-glued pair, verified against the
    pulled-back quadratic form.  Returns (DN, quotient, residual)."""
    res = self_glue(g, y1, y2, f)
    rel = relative_data(res.graph, res.marking, m2)
    order = y1.sorted_vertices
    perm = [rel.boundary_index(v) for v in order]
    dn_direct = rel.dn[np.ix_(perm, perm)]
    pulled = pulled_back_dn_form(g, y1, y2, f, m2)
    residual = float(np.abs(dn_direct - pulled).max())
    return dn_direct, res, residual


@dataclass(frozen=True)
class TraceFormulaReport:
    lhs: float
    rhs: float
    residual: float
    rhs_by_hbar: dict[float, float]

    def as_dict(self) -> dict:
        return {
            "z_glued": self.lhs,
            "z_trace_integral": self.rhs,
            "residual": self.residual,
            "rhs_by_hbar": {str(h): v for h, v in self.rhs_by_hbar.items()},
        }


def trace_formula_check(
    g: Graph,
    y1: BoundaryMarking,
    y2: BoundaryMarking,
    f: dict[str, str],
    m2: float,
    hbars: tuple[float, ...] = (0.1, 1.0, 10.0),
    quad_nodes: int = 64,
) -> TraceFormulaReport:
    """Partition function of the quotient vs the Gaussian trace integral.

    The closed form of the integral is hbar-free; the report also evaluates
    it by Gauss-Hermite quadrature at each requested hbar to exhibit the
    cancellation numerically.
    """
    res = self_glue(g, y1, y2, f)
    lhs = gaussian_data(res.graph, m2).z()

    union = BoundaryMarking(
        g,
        y1.boundary_vertices | y2.boundary_vertices,
        y1.boundary_edges + y2.boundary_edges,
    )
    rel = relative_data(g, union, m2)
    form = pulled_back_dn_form(g, y1, y2, f, m2)
    rhs = rel.det_k_rel ** -0.5 * linalg.det(form) ** -0.5

    from numpy.polynomial.hermite import hermgauss

    nodes, weights = hermgauss(quad_nodes)
    eigvals = np.linalg.eigvalsh(form)
    rhs_by_hbar: dict[float, float] = {}
    for hbar in hbars:
        # One Gauss-Hermite axis per mode, deliberately scaled off the exact
        # covariance so the quadrature does nontrivial work.
        total = 1.0
        for lam in eigvals:
            s = np.sqrt(2.0 * hbar / (1.0 + lam))
            vals = weights * np.exp(nodes**2 * (1.0 - lam * s**2 / (2.0 * hbar)))
            total *= float(np.sum(vals)) * s / np.sqrt(2.0 * np.pi * hbar)
        rhs_by_hbar[hbar] = rel.det_k_rel ** -0.5 * float(total)
    return TraceFormulaReport(lhs, rhs, abs(lhs - rhs), rhs_by_hbar)
