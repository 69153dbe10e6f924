"""Free (quadratic) theory on a graph: propagators, determinants,
Dirichlet data, partition functions, correlators and heat kernels.

The primary route to relative data is the Schur complement of the kinetic
operator restricted to the bulk; the block-of-the-inverse route is computed
alongside as a cross-check (the two must agree to 1e-9, else something is
numerically wrong at these sizes and we refuse to return data).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    InsertionOnBoundary,
    NegativeTime,
    NumericalFault,
)
from .graphs import BoundaryMarking, Graph, block_indices, kinetic

REL_CROSSCHECK_TOL = 1e-9


@dataclass(frozen=True)
class GaussianData:
    """Propagator and determinant of the kinetic operator on a closed graph."""

    graph: Graph
    m2: float
    propagator: np.ndarray
    det_k: float

    def z(self) -> float:
        return self.det_k ** -0.5

    def g(self, u: str, v: str) -> float:
        return float(self.propagator[self.graph.index(u), self.graph.index(v)])


@dataclass(frozen=True)
class RelativeGaussianData:
    """Dirichlet data of a graph relative to a marked boundary subgraph.

    Matrices are indexed by ``bulk_vertices`` and ``boundary_vertices`` in
    canonical order: ``propagator`` is bulk x bulk, ``dn`` is Y x Y and
    ``ext`` is bulk x Y.
    """

    marking: BoundaryMarking
    m2: float
    bulk_vertices: tuple[str, ...]
    boundary_vertices: tuple[str, ...]
    propagator: np.ndarray
    det_k_rel: float
    dn: np.ndarray
    ext: np.ndarray
    boundary_empty: bool = False

    @property
    def graph(self) -> Graph:
        return self.marking.graph

    def bulk_index(self, v: str) -> int:
        return self.bulk_vertices.index(v)

    def boundary_index(self, v: str) -> int:
        return self.boundary_vertices.index(v)


def gaussian_data(g: Graph, m2: float) -> GaussianData:
    k = kinetic(g, m2)
    f = linalg.factorize(k)
    prop = f.solve(np.eye(g.n))
    return GaussianData(g, m2, 0.5 * (prop + prop.T), f.det())


def relative_data(g: Graph, y: BoundaryMarking, m2: float, check: bool = True) -> RelativeGaussianData:
    """Dirichlet propagator, determinant, DN and extension operators.

    An empty marking yields data equivalent to the absolute theory, flagged
    with ``boundary_empty``; an all-boundary marking yields empty bulk blocks
    with det 1 and DN equal to the kinetic operator restricted to Y.
    """
    if y.graph != g:
        raise ValueError("marking must live on the given graph")
    k = kinetic(g, m2)
    bulk, bdry = block_indices(y)
    bulk_vs = tuple(g.vertices[i] for i in bulk)
    bdry_vs = tuple(g.vertices[i] for i in bdry)

    a_hat = k[np.ix_(bulk, bulk)]
    b_hat = k[np.ix_(bulk, bdry)]
    d_hat = k[np.ix_(bdry, bdry)]

    if not bulk:
        prop = np.zeros((0, 0))
        ext = np.zeros((0, len(bdry)))
        return RelativeGaussianData(
            y, m2, bulk_vs, bdry_vs, prop, 1.0, d_hat, ext, boundary_empty=not bdry
        )

    f = linalg.factorize(a_hat)
    prop = f.solve(np.eye(len(bulk)))
    prop = 0.5 * (prop + prop.T)
    ext = -f.solve(b_hat)
    dn = d_hat - b_hat.T @ (prop @ b_hat)
    dn = 0.5 * (dn + dn.T)
    det_rel = f.det()

    if check and bdry:
        # Independent route: DN and E from the blocks of the full inverse.
        full_inv = linalg.inverse(k)
        d_block = full_inv[np.ix_(bdry, bdry)]
        b_block = full_inv[np.ix_(bulk, bdry)]
        dn_alt = linalg.inverse(d_block)
        ext_alt = b_block @ dn_alt
        scale = max(np.abs(dn).max(), 1.0)
        if np.abs(dn - dn_alt).max() > REL_CROSSCHECK_TOL * scale:
            raise NumericalFault("Schur and inverse-block DN operators disagree")
        if ext.size and np.abs(ext - ext_alt).max() > REL_CROSSCHECK_TOL * max(
            np.abs(ext).max(), 1.0
        ):
            raise NumericalFault("Schur and inverse-block extension operators disagree")

    return RelativeGaussianData(
        y, m2, bulk_vs, bdry_vs, prop, det_rel, dn, ext, boundary_empty=not bdry
    )


def rel_partition_exponent_matrix(r: RelativeGaussianData) -> np.ndarray:
    """Quadratic form of the relative partition function: DN - K_Y / 2."""
    k_y = kinetic(r.marking.subgraph(), r.m2) if r.boundary_vertices else np.zeros((0, 0))
    return r.dn - 0.5 * k_y


def gaussian_rel_z(r: RelativeGaussianData, phi_y: np.ndarray, hbar: float) -> float:
    """det(K_rel)^(-1/2) exp(-(1/2 hbar) phi_Y^T (DN - K_Y/2) phi_Y)."""
    phi_y = np.asarray(phi_y, dtype=float)
    if phi_y.shape != (len(r.boundary_vertices),):
        raise DimensionMismatch(
            f"boundary field has shape {phi_y.shape}, expected ({len(r.boundary_vertices)},)"
        )
    quad = float(phi_y @ (rel_partition_exponent_matrix(r) @ phi_y))
    return r.det_k_rel ** -0.5 * np.exp(-quad / (2.0 * hbar))


def _pairings(items: list) -> list[list[tuple]]:
    if not items:
        return [[]]
    first, rest = items[0], items[1:]
    out = []
    for i, other in enumerate(rest):
        remaining = rest[:i] + rest[i + 1 :]
        for tail in _pairings(remaining):
            out.append([(first, other)] + tail)
    return out


def wick_correlator(gd: GaussianData, vertices: list[str], hbar: float) -> float:
    """Moment of the Gaussian measure: hbar^m times the sum over perfect
    matchings of products of propagator entries.  Odd moments vanish."""
    if len(vertices) % 2 == 1:
        return 0.0
    idx = [gd.graph.index(v) for v in vertices]
    m = len(idx) // 2
    total = 0.0
    for pairing in _pairings(idx):
        prod = 1.0
        for i, j in pairing:
            prod *= gd.propagator[i, j]
        total += prod
    return hbar**m * total


def rel_mean(r: RelativeGaussianData, phi_y: np.ndarray) -> np.ndarray:
    """One-point function on the bulk: the extension of the boundary field."""
    phi_y = np.asarray(phi_y, dtype=float)
    if phi_y.shape != (len(r.boundary_vertices),):
        raise DimensionMismatch("boundary field length must match |Y|")
    return r.ext @ phi_y


def rel_centered_correlator(
    r: RelativeGaussianData, insertions: list[str], hbar: float
) -> float:
    """Centered moment: Wick pairings with the Dirichlet propagator."""
    for v in insertions:
        if v not in r.bulk_vertices:
            raise InsertionOnBoundary(f"{v} is not a bulk vertex")
    if len(insertions) % 2 == 1:
        return 0.0
    idx = [r.bulk_index(v) for v in insertions]
    total = 0.0
    for pairing in _pairings(idx):
        prod = 1.0
        for i, j in pairing:
            prod *= r.propagator[i, j]
        total += prod
    return hbar ** (len(idx) // 2) * total


def rel_correlator(
    r: RelativeGaussianData, phi_y: np.ndarray, insertions: list[str], hbar: float
) -> float:
    """Non-centered moment: pair any even subset with the Dirichlet
    propagator and evaluate the rest on the classical extension."""
    for v in insertions:
        if v not in r.bulk_vertices:
            raise InsertionOnBoundary(f"{v} is not a bulk vertex")
    mean = rel_mean(r, phi_y)
    idx = [r.bulk_index(v) for v in insertions]
    n = len(idx)
    total = 0.0
    for paired_count in range(0, n + 1, 2):
        for paired_pos in itertools.combinations(range(n), paired_count):
            rest = [idx[i] for i in range(n) if i not in paired_pos]
            paired = [idx[i] for i in paired_pos]
            wick = 0.0
            for pairing in _pairings(paired):
                prod = 1.0
                for i, j in pairing:
                    prod *= r.propagator[i, j]
                wick += prod
            mean_part = 1.0
            for i in rest:
                mean_part *= mean[i]
            total += hbar ** (paired_count // 2) * wick * mean_part
    return total


@lru_cache(maxsize=256)
def _kinetic_eigh(g: Graph, m2: float) -> tuple[np.ndarray, np.ndarray]:
    w, u = np.linalg.eigh(kinetic(g, m2))
    return w, u


def heat_kernel(g: Graph, m2: float, t: float) -> np.ndarray:
    """exp(-t K) with K the kinetic operator; eigendecomposition cached per
    (graph, m2)."""
    if t < 0:
        raise NegativeTime(f"t must be >= 0, got {t}")
    w, u = _kinetic_eigh(g, m2)
    out = (u * np.exp(-t * w)) @ u.T
    return 0.5 * (out + out.T)


def action(g: Graph, m2: float, phi: np.ndarray) -> float:
    """Quadratic action phi^T K phi / 2."""
    phi = np.asarray(phi, dtype=float)
    return 0.5 * float(phi @ (kinetic(g, m2) @ phi))
