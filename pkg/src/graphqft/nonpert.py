"""Nonperturbative oracle: direct evaluation of the finite-dimensional
field integrals by tensor-product Gauss-Hermite quadrature.

Nodes are centered on the quadratic part of the action (the unique minimum
of the potential is at zero), scaled per vertex by 1/sqrt(m^2+val), and the
interacting integrand is divided by the node-generating Gaussian.  A fixed
seed Monte Carlo fallback with antithetic sampling exists for dimensions
beyond the tensor grid; it reports a statistical error and is never used by
the acceptance checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .errors import DimensionTooLarge, PotentialUnbounded
from .feynman import Potential
from .gaussian import RelativeGaussianData, relative_data
from .graphs import BoundaryMarking, Graph, block_indices, kinetic

MAX_GRID_POINTS = 25_000_000


@dataclass(frozen=True)
class QuadratureScheme:
    """Tensor Gauss-Hermite configuration with a seeded MC fallback."""

    nodes: int = 64
    mc_samples: int = 200_000
    seed: int = 0

    def __post_init__(self):
        if self.nodes < 16:
            raise ValueError("node count must be at least 16")


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    nodes_used: int
    method: str = "gauss-hermite"


def check_potential(pot: Potential, m2: float, scan_halfwidth: float = 25.0) -> None:
    """Growth condition: m^2 phi^2/2 + p(phi) must diverge at both ends and
    have its unique minimum at zero.  Polynomial tails are checked exactly,
    the interior on a scan grid."""
    if pot.is_empty():
        return
    deg = pot.max_degree()
    lead = pot.coupling(deg)
    if deg % 2 == 1:
        raise PotentialUnbounded(f"odd leading degree {deg}")
    if lead < 0:
        raise PotentialUnbounded(f"negative leading coupling p{deg}")
    phi = np.linspace(-scan_halfwidth, scan_halfwidth, 4001)
    v = 0.5 * m2 * phi**2 + pot.value(phi)
    inner = np.abs(phi) > 1e-9
    if np.any(v[inner] <= 0.0):
        raise PotentialUnbounded("potential admits a second minimum at or below zero")


def _action(g: Graph, m2: float, pot: Potential, fields: list[np.ndarray]) -> np.ndarray:
    k = kinetic(g, m2)
    n = g.n
    s = np.zeros(np.broadcast_shapes(*(f.shape for f in fields)))
    for i in range(n):
        s = s + 0.5 * k[i, i] * fields[i] ** 2
        for j in range(i + 1, n):
            if k[i, j] != 0.0:
                s = s + k[i, j] * fields[i] * fields[j]
    if not pot.is_empty():
        for i in range(n):
            s = s + pot.value(fields[i])
    return s


def _tensor_gh(
    widths: np.ndarray, integrand, nodes: int
) -> float:
    """Integral of integrand(fields) * prod_i exp(-phi_i^2/(2 widths_i^2))
    ... actually of the raw integrand against Lebesgue measure: the caller's
    integrand must include every non-Gaussian factor; the GH substitution
    phi_i = sqrt(2) w_i x_i supplies exp(-x^2) reference weights."""
    dim = len(widths)
    if nodes**dim > MAX_GRID_POINTS:
        raise DimensionTooLarge(
            f"{nodes}^{dim} grid points exceed the cap {MAX_GRID_POINTS}"
        )
    x, w = hermgauss(nodes)
    fields = []
    weights = []
    for i in range(dim):
        shape = [1] * dim
        shape[i] = nodes
        fields.append((np.sqrt(2.0) * widths[i] * x).reshape(shape))
        weights.append(w.reshape(shape))
    vals = integrand(fields)
    # undo the exp(-x^2) reference weight per axis
    for i in range(dim):
        vals = vals * np.exp((fields[i] / (np.sqrt(2.0) * widths[i])) ** 2) * weights[i]
    total = float(np.sum(vals))
    scale = float(np.prod(np.sqrt(2.0) * widths))
    return total * scale


def z_nonpert(
    g: Graph,
    m2: float,
    pot: Potential,
    hbar: float,
    scheme: QuadratureScheme = QuadratureScheme(),
) -> QuadratureResult:
    """Partition function: integral of exp(-S/hbar) over all vertex fields
    against prod dphi/sqrt(2 pi hbar), with node-doubling error estimate."""
    check_potential(pot, m2)
    n = g.n
    if n == 0:
        return QuadratureResult(1.0, 0.0, 0)
    widths = np.sqrt(hbar / (m2 + g.valence_vector().astype(float)))

    def integrand(fields):
        return np.exp(-_action(g, m2, pot, fields) / hbar)

    norm = (2.0 * math.pi * hbar) ** (-n / 2.0)
    if scheme.nodes**n > MAX_GRID_POINTS:
        return _mc_fallback(g, m2, pot, hbar, scheme)
    coarse = norm * _tensor_gh(widths, integrand, scheme.nodes)
    fine_nodes = 2 * scheme.nodes
    if fine_nodes**n > MAX_GRID_POINTS:
        fine_nodes = scheme.nodes + scheme.nodes // 2
    if fine_nodes**n > MAX_GRID_POINTS:
        return QuadratureResult(coarse, float("nan"), scheme.nodes)
    fine = norm * _tensor_gh(widths, integrand, fine_nodes)
    return QuadratureResult(fine, abs(fine - coarse), fine_nodes)


def _mc_fallback(
    g: Graph, m2: float, pot: Potential, hbar: float, scheme: QuadratureScheme
) -> QuadratureResult:
    """Antithetic importance sampling against the width-matched Gaussian."""
    if scheme.mc_samples < 2:
        raise DimensionTooLarge(
            f"{scheme.nodes}^{g.n} tensor grid exceeds the cap and MC is disabled"
        )
    rng = np.random.default_rng(scheme.seed)
    n = g.n
    widths = np.sqrt(hbar / (m2 + g.valence_vector().astype(float)))
    half = scheme.mc_samples // 2
    z = rng.standard_normal((half, n))
    z = np.vstack([z, -z])
    phi = z * widths
    fields = [phi[:, i] for i in range(n)]
    s = _action(g, m2, pot, fields) / hbar
    log_q = -0.5 * np.sum(z**2, axis=1)
    ratio = np.exp(-s - log_q)
    # prod dphi/sqrt(2 pi hbar) against the sampling density
    jac = np.prod(widths) * (2.0 * math.pi) ** (n / 2.0) / (2.0 * math.pi * hbar) ** (n / 2.0)
    vals = ratio * jac
    mean = float(np.mean(vals))
    err = float(np.std(vals) / math.sqrt(len(vals)))
    return QuadratureResult(mean, err, scheme.mc_samples, method="monte-carlo")


def z_rel_nonpert(
    g: Graph,
    y: BoundaryMarking,
    m2: float,
    pot: Potential,
    hbar: float,
    phi_y: np.ndarray,
    scheme: QuadratureScheme = QuadratureScheme(),
) -> QuadratureResult:
    """Relative partition function: bulk fields integrated with the boundary
    clamped, exp(-(S_X - S_Y/2)/hbar) against prod_bulk dphi/sqrt(2 pi hbar)."""
    check_potential(pot, m2)
    phi_y = np.asarray(phi_y, dtype=float)
    bulk_idx, bdry_idx = block_indices(y)
    nb = len(bulk_idx)
    bdry_order = [g.vertices[i] for i in bdry_idx]
    if phi_y.shape != (len(bdry_idx),):
        raise ValueError("boundary field length must match the marking")

    y_graph = y.subgraph()
    # S_Y uses the marking's own edges and the same mass and potential.
    s_y = 0.5 * float(phi_y @ (kinetic(y_graph, m2) @ phi_y)) if bdry_idx else 0.0
    s_y += float(sum(pot.value(p) for p in phi_y))

    if nb == 0:
        val = math.exp(-(0.5 * s_y) / hbar)
        return QuadratureResult(val, 0.0, 0)

    widths = np.sqrt(hbar / (m2 + np.array([g.valence(g.vertices[i]) for i in bulk_idx])))
    k = kinetic(g, m2)

    def integrand(fields):
        shape = np.broadcast_shapes(*(f.shape for f in fields))
        full: list = [None] * g.n
        for pos, i in enumerate(bulk_idx):
            full[i] = fields[pos]
        for pos, i in enumerate(bdry_idx):
            full[i] = np.full(shape, phi_y[pos]) if shape else phi_y[pos]
        s = np.zeros(shape)
        for i in range(g.n):
            s = s + 0.5 * k[i, i] * full[i] ** 2
            for j in range(i + 1, g.n):
                if k[i, j] != 0.0:
                    s = s + k[i, j] * full[i] * full[j]
        if not pot.is_empty():
            for i in range(g.n):
                s = s + pot.value(full[i])
        return np.exp(-(s - 0.5 * s_y) / hbar)

    norm = (2.0 * math.pi * hbar) ** (-nb / 2.0)
    coarse = norm * _tensor_gh(widths, integrand, scheme.nodes)
    fine = norm * _tensor_gh(widths, integrand, 2 * scheme.nodes)
    return QuadratureResult(fine, abs(fine - coarse), 2 * scheme.nodes)


@dataclass(frozen=True)
class FubiniReport:
    z_whole: float
    z_glued_integral: float
    residual: float
    relative_residual: float


def fubini_gluing_check(
    spec,
    m2: float,
    pot: Potential,
    hbar: float,
    scheme: QuadratureScheme = QuadratureScheme(),
) -> FubiniReport:
    """Whole-graph partition function vs the boundary-field integral of the
    product of the two relative partition functions, by nested quadrature."""
    from .graphs import glue

    res = glue(spec)
    whole = z_nonpert(res.graph, m2, pot, hbar, scheme).value

    y_order = sorted(spec.left.boundary_vertices)
    ny = len(y_order)
    left_perm_target = y_order
    right_perm_target = [spec.identification[v] for v in y_order]

    widths = np.sqrt(
        hbar / (m2 + np.array([res.graph.valence(v) for v in y_order], dtype=float))
    )

    x, w = hermgauss(scheme.nodes)
    grids = np.meshgrid(*([np.sqrt(2.0) * x] * ny), indexing="ij")
    weights = np.meshgrid(*([w] * ny), indexing="ij")

    total = 0.0
    it = np.nditer(grids[0], flags=["multi_index"])
    left_bdry = sorted(spec.left.boundary_vertices)
    right_bdry = sorted(spec.right.boundary_vertices)
    for _ in it:
        idx = it.multi_index
        phi = np.array([widths[i] * grids[i][idx] for i in range(ny)])
        wt = 1.0
        for i in range(ny):
            wt *= weights[i][idx] * np.exp(grids[i][idx] ** 2 / 2.0)
        # assemble boundary fields in each side's own vertex order
        phi_left = np.array(
            [phi[left_perm_target.index(v)] for v in left_bdry]
        )
        phi_right = np.array(
            [phi[right_perm_target.index(v)] for v in right_bdry]
        )
        zl = z_rel_nonpert(spec.left.graph, spec.left, m2, pot, hbar, phi_left, scheme).value
        zr = z_rel_nonpert(spec.right.graph, spec.right, m2, pot, hbar, phi_right, scheme).value
        total += wt * zl * zr * float(np.prod(np.sqrt(2.0) * widths))
    total /= (2.0 * math.pi * hbar) ** (ny / 2.0)
    resid = abs(whole - total)
    return FubiniReport(whole, total, resid, resid / abs(whole))


def asymptotic_order_fit(
    residuals: dict[float, float],
) -> float:
    """Least-squares slope of log|residual| against log hbar."""
    hbars = np.array(sorted(residuals))
    vals = np.array([abs(residuals[h]) for h in hbars])
    mask = vals > 0
    slope = np.polyfit(np.log(hbars[mask]), np.log(vals[mask]), 1)[0]
    return float(slope)


def asymptotic_slope(
    g: Graph,
    m2: float,
    pot: Potential,
    order: int,
    hbars: tuple[float, ...] = (1e-3, 3e-3, 1e-2, 3e-2, 1e-1),
    scheme: QuadratureScheme = QuadratureScheme(),
) -> tuple[float, dict[float, float]]:
    """Sweep hbar, compare the nonperturbative value against the truncated
    expansion, and fit the decay rate of the residual (expected order+1)."""
    from .feynman import z_pert_closed

    residuals = {}
    for h in hbars:
        z = z_nonpert(g, m2, pot, h, scheme).value
        zp = z_pert_closed(g, m2, pot, h, order).value
        residuals[h] = z - zp
    return asymptotic_order_fit(residuals), residuals
