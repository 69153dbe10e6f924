"""Feynman diagrams over a spacetime graph: enumeration with symmetry
factors, matrix and first-quantized weights, perturbative partition
functions, and the decoration calculus for cutting along a gluing interface.

A diagram is stored as a symmetric bulk adjacency matrix (diagonal = self
loop counts), a vector of univalent boundary legs per bulk vertex, and an
optional number of isolated boundary-boundary edges (used only to exercise
the alternative convention that trades the DN prefactor for such edges).
Automorphisms are counted on the half-edge (dart) structure: parallel edges
and the two flips of every self loop all contribute.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from . import linalg
from .errors import BoundaryMismatch, GraphQFTError, OrderTooLarge
from .gaussian import GaussianData, RelativeGaussianData, gaussian_data, relative_data
from .gluing import total_dn_operator
from .graphs import BoundaryMarking, Graph, GluingSpec, glue, kinetic
from .series import series_green, series_relative

DEFAULT_ORDER_CAP = 3


@dataclass(frozen=True)
class Potential:
    """Polynomial interaction sum_k p_k phi^k / k! with k >= 3."""

    couplings: tuple[tuple[int, float], ...]

    def __init__(self, couplings: dict[int, float] | None = None, **by_name: float):
        merged = dict(couplings or {})
        for name, val in by_name.items():
            if not name.startswith("p"):
                raise GraphQFTError(f"unknown coupling {name}")
            merged[int(name[1:])] = val
        for k in merged:
            if k < 3:
                raise GraphQFTError(f"coupling degree {k} below 3")
        object.__setattr__(
            self,
            "couplings",
            tuple(sorted((k, float(v)) for k, v in merged.items() if v != 0.0)),
        )

    def support(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.couplings)

    def coupling(self, k: int) -> float:
        for kk, v in self.couplings:
            if kk == k:
                return v
        return 0.0

    def value(self, phi):
        out = 0.0
        for k, p in self.couplings:
            out = out + p * phi**k / math.factorial(k)
        return out

    def is_empty(self) -> bool:
        return not self.couplings

    def max_degree(self) -> int:
        return max((k for k, _ in self.couplings), default=0)


@dataclass(frozen=True)
class FeynmanGraph:
    """Multigraph with dart structure, split into bulk vertices and
    univalent boundary legs."""

    adj: tuple[tuple[int, ...], ...]  # symmetric; diagonal = loop counts
    legs: tuple[int, ...]
    bb_edges: int = 0

    def __post_init__(self):
        n = len(self.adj)
        if len(self.legs) != n:
            raise GraphQFTError("legs vector must match the bulk size")
        for i in range(n):
            for j in range(n):
                if self.adj[i][j] != self.adj[j][i]:
                    raise GraphQFTError("bulk adjacency must be symmetric")

    @property
    def n_bulk(self) -> int:
        return len(self.adj)

    @property
    def n_boundary(self) -> int:
        return sum(self.legs) + 2 * self.bb_edges

    @property
    def n_edges(self) -> int:
        internal = sum(
            self.adj[i][j] for i in range(self.n_bulk) for j in range(i, self.n_bulk)
        )
        return internal + sum(self.legs) + self.bb_edges

    def valence(self, i: int) -> int:
        return (
            sum(self.adj[i][j] for j in range(self.n_bulk) if j != i)
            + 2 * self.adj[i][i]
            + self.legs[i]
        )

    def order_closed(self) -> int:
        """Loop order |E| - |V| of a vacuum diagram."""
        if self.n_boundary:
            raise GraphQFTError("closed order is defined for vacuum diagrams")
        return self.n_edges - self.n_bulk

    def order_relative(self) -> float:
        """Grading |E| - |V_bulk| - |V_boundary|/2 of the rescaled boundary
        field expansion; half-integers are possible."""
        return self.n_edges - self.n_bulk - 0.5 * self.n_boundary

    def is_connected(self) -> bool:
        if self.bb_edges:
            return self.bb_edges == 1 and self.n_bulk == 0
        n = self.n_bulk
        if n == 0:
            return False
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            for j in range(n):
                if j not in seen and self.adj[i][j] > 0:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == n

    def canonical_key(self) -> tuple:
        n = self.n_bulk
        best = None
        for perm in itertools.permutations(range(n)):
            mat = tuple(
                tuple(self.adj[perm[i]][perm[j]] for j in range(n)) for i in range(n)
            )
            key = (mat, tuple(self.legs[perm[i]] for i in range(n)))
            if best is None or key < best:
                best = key
        return (best, self.bb_edges)

    @cached_property
    def aut(self) -> int:
        return automorphism_count(self)

    def label(self) -> str:
        """Compact canonical text form: loops/edges/legs of the minimal
        labeling, e.g. '2v e01x3' for the theta graph."""
        (mat, legs), bb = self.canonical_key()
        n = len(mat)
        parts = [f"{n}v"]
        for i in range(n):
            if mat[i][i]:
                parts.append(f"loop{i}x{mat[i][i]}")
        for i in range(n):
            for j in range(i + 1, n):
                if mat[i][j]:
                    parts.append(f"e{i}{j}x{mat[i][j]}")
        for i in range(n):
            if legs[i]:
                parts.append(f"leg{i}x{legs[i]}")
        if bb:
            parts.append(f"bb x{bb}")
        return " ".join(parts) if len(parts) > 1 or n else "empty"


EMPTY_GRAPH = FeynmanGraph((), ())


def automorphism_count(fg: FeynmanGraph) -> int:
    """Order of the dart-structure automorphism group.

    Sums over bulk-vertex permutations preserving the labeled structure; for
    each, parallel edges may be permuted, every self loop may additionally be
    flipped, and legs at one vertex may be permuted.  Isolated boundary
    edges contribute their own flips and permutations.
    """
    n = fg.n_bulk
    per_sigma = 1
    for i in range(n):
        per_sigma *= math.factorial(fg.adj[i][i]) * 2 ** fg.adj[i][i]
        per_sigma *= math.factorial(fg.legs[i])
        for j in range(i + 1, n):
            per_sigma *= math.factorial(fg.adj[i][j])
    n_sigma = 0
    for perm in itertools.permutations(range(n)):
        if all(fg.legs[perm[i]] == fg.legs[i] for i in range(n)) and all(
            fg.adj[perm[i]][perm[j]] == fg.adj[i][j] for i in range(n) for j in range(n)
        ):
            n_sigma += 1
    bb = math.factorial(fg.bb_edges) * 2**fg.bb_edges
    return n_sigma * per_sigma * bb


def automorphism_count_darts(fg: FeynmanGraph) -> int:
    """Brute-force dart count: enumerate dart bijections commuting with the
    edge involution and the vertex assignment (boundary legs included as
    genuine univalent vertices).  Exponential; intended for small diagrams
    and as an oracle for :func:`automorphism_count`."""
    darts: list[tuple[str, int]] = []  # (kind, vertex) per dart
    involution: dict[int, int] = {}
    vertex_of: list[int] = []
    boundary_flag: list[bool] = []

    def new_dart(vertex: int, is_boundary: bool) -> int:
        idx = len(vertex_of)
        vertex_of.append(vertex)
        boundary_flag.append(is_boundary)
        return idx

    next_vertex = fg.n_bulk
    for i in range(fg.n_bulk):
        for _ in range(fg.adj[i][i]):
            d1, d2 = new_dart(i, False), new_dart(i, False)
            involution[d1], involution[d2] = d2, d1
    for i in range(fg.n_bulk):
        for j in range(i + 1, fg.n_bulk):
            for _ in range(fg.adj[i][j]):
                d1, d2 = new_dart(i, False), new_dart(j, False)
                involution[d1], involution[d2] = d2, d1
    for i in range(fg.n_bulk):
        for _ in range(fg.legs[i]):
            b = next_vertex
            next_vertex += 1
            d1, d2 = new_dart(i, False), new_dart(b, True)
            involution[d1], involution[d2] = d2, d1
    for _ in range(fg.bb_edges):
        b1, b2 = next_vertex, next_vertex + 1
        next_vertex += 2
        d1, d2 = new_dart(b1, True), new_dart(b2, True)
        involution[d1], involution[d2] = d2, d1

    n_darts = len(vertex_of)
    darts_at: dict[int, list[int]] = {}
    for d in range(n_darts):
        darts_at.setdefault(vertex_of[d], []).append(d)

    count = 0

    def extend(mapping: dict[int, int], vmap: dict[int, int], remaining: list[int]):
        nonlocal count
        if not remaining:
            count += 1
            return
        d = remaining[0]
        for target in range(n_darts):
            if target in mapping.values():
                continue
            if boundary_flag[d] != boundary_flag[target]:
                continue
            v, tv = vertex_of[d], vertex_of[target]
            if v in vmap and vmap[v] != tv:
                continue
            if v not in vmap and tv in vmap.values():
                continue
            partner, tpartner = involution[d], involution[target]
            if partner in mapping and mapping[partner] != tpartner:
                continue
            new_map = dict(mapping)
            new_map[d] = target
            new_vmap = dict(vmap)
            new_vmap[v] = tv
            consistent = True
            if partner not in new_map:
                pv, tpv = vertex_of[partner], vertex_of[tpartner]
                if boundary_flag[partner] != boundary_flag[tpartner]:
                    consistent = False
                elif pv in new_vmap and new_vmap[pv] != tpv:
                    consistent = False
                elif pv not in new_vmap and tpv in new_vmap.values():
                    consistent = False
                else:
                    new_map[partner] = tpartner
                    new_vmap[pv] = tpv
            if not consistent:
                continue
            extend(new_map, new_vmap, [x for x in remaining if x not in new_map])
        return

    extend({}, {}, list(range(n_darts)))
    return count


# ---------------------------------------------------------------------------
# Enumeration of isomorphism classes
# ---------------------------------------------------------------------------

def _degree_sequences(valences: tuple[int, ...], n: int):
    yield from itertools.combinations_with_replacement(sorted(valences, reverse=True), n)


def _fill_matrices(degrees: tuple[int, ...]):
    """All symmetric matrices (diagonal = loops) realizing the degree
    sequence; upper triangle filled row by row."""
    n = len(degrees)
    adj = [[0] * n for _ in range(n)]
    remaining = list(degrees)

    def rec(i: int):
        if i == n:
            # Each vertex's budget was spent exactly when it was processed.
            yield tuple(tuple(row) for row in adj)
            return
        # choose loops at i, then edges to j > i
        def fill(j: int, left: int):
            if left < 0:
                return
            if j == n:
                if left == 0:
                    yield from rec(i + 1)
                return
            cap = min(left, remaining[j])
            for c in range(cap + 1):
                adj[i][j] = adj[j][i] = c
                remaining[j] -= c
                yield from fill(j + 1, left - c)
                remaining[j] += c
                adj[i][j] = adj[j][i] = 0

        max_loops = remaining[i] // 2
        for loops in range(max_loops + 1):
            adj[i][i] = loops
            yield from fill(i + 1, remaining[i] - 2 * loops)
            adj[i][i] = 0

    yield from rec(0)


def enumerate_feynman_graphs(
    max_order: float,
    mode: str = "closed",
    allowed_valences: tuple[int, ...] = (3, 4),
    order_cap: float = DEFAULT_ORDER_CAP,
    connected_only: bool = False,
    min_order: float | None = None,
) -> list[FeynmanGraph]:
    """All isomorphism classes up to the grading cut-off.

    Closed mode: vacuum diagrams with loop order |E|-|V| in [1, max_order].
    Relative mode: diagrams with univalent boundary legs, no
    boundary-boundary edges, graded by |E|-|V_bulk|-|V_boundary|/2
    (half-integers appear; the minimum is 1/2).
    """
    if max_order > order_cap:
        raise OrderTooLarge(f"order {max_order} above cap {order_cap}")
    if not allowed_valences:
        return [EMPTY_GRAPH]
    if mode not in ("closed", "relative"):
        raise GraphQFTError(f"unknown mode {mode}")
    lo = min_order if min_order is not None else (1 if mode == "closed" else 0.5)

    out: dict[tuple, FeynmanGraph] = {}
    max_bulk = int(2 * max_order) if mode == "closed" else int(2 * max_order)
    for n in range(1, max_bulk + 1):
        for degs in _degree_sequences(tuple(allowed_valences), n):
            if sum(degs) % 2 == 1 and mode == "closed":
                continue
            if mode == "closed":
                e = sum(degs) // 2
                order = e - n
                if not lo <= order <= max_order:
                    continue
                for adj in _fill_matrices(degs):
                    fg = FeynmanGraph(adj, (0,) * n)
                    if connected_only and not fg.is_connected():
                        continue
                    out.setdefault(fg.canonical_key(), fg)
            else:
                # split each vertex's valence into internal degree + legs
                for legs in itertools.product(*(range(d + 1) for d in degs)):
                    internal = [d - l for d, l in zip(degs, legs)]
                    if sum(internal) % 2 == 1:
                        continue
                    e = sum(internal) // 2 + sum(legs)
                    order = e - n - 0.5 * sum(legs)
                    if not lo <= order <= max_order:
                        continue
                    for adj in _fill_matrices(tuple(internal)):
                        fg = FeynmanGraph(adj, tuple(legs))
                        if connected_only and not fg.is_connected():
                            continue
                        out.setdefault(fg.canonical_key(), fg)
    return sorted(out.values(), key=lambda f: (f.order_relative(), f.canonical_key()))


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------

def _contract(vertex_vectors: list[np.ndarray], pair_factors: dict) -> float:
    """Sum over all vertex placements of the product of vertex vectors and
    per-pair factor matrices; a small tensor network evaluated greedily."""
    n = len(vertex_vectors)
    if n == 0:
        return 1.0
    letters = "abcdefghijklmnopqrstuvwxyz"
    subs = []
    ops = []
    for i, vec in enumerate(vertex_vectors):
        subs.append(letters[i])
        ops.append(vec)
    for (i, j), mat in pair_factors.items():
        subs.append(letters[i] + letters[j])
        ops.append(mat)
    expr = ",".join(subs) + "->"
    return float(np.einsum(expr, *ops, optimize="greedy"))


def weight_closed(fg: FeynmanGraph, gd: GaussianData, pot: Potential) -> float:
    """Sum over vertex maps into the spacetime graph of coupling factors on
    vertices and propagators on edges."""
    if fg.n_boundary:
        raise GraphQFTError("closed weight needs a vacuum diagram")
    g = gd.propagator
    diag = np.diag(g)
    vecs = []
    for i in range(fg.n_bulk):
        v = -pot.coupling(fg.valence(i)) * np.ones(g.shape[0])
        v = v * diag ** fg.adj[i][i]
        vecs.append(v)
    pairs = {}
    for i in range(fg.n_bulk):
        for j in range(i + 1, fg.n_bulk):
            if fg.adj[i][j]:
                pairs[(i, j)] = g ** fg.adj[i][j]
    return _contract(vecs, pairs)


def weight_relative(
    fg: FeynmanGraph,
    rd: RelativeGaussianData,
    pot: Potential,
    phi_y: np.ndarray,
) -> float:
    """Relative weight: bulk vertices range over the bulk, boundary legs
    carry extension-operator factors against the boundary field, and
    isolated boundary-boundary edges (alternative convention) carry -DN."""
    phi_y = np.asarray(phi_y, dtype=float)
    g = rd.propagator
    ext_phi = rd.ext @ phi_y if rd.ext.size else np.zeros(len(rd.bulk_vertices))
    diag = np.diag(g) if g.size else np.zeros(0)
    vecs = []
    for i in range(fg.n_bulk):
        v = -pot.coupling(fg.valence(i)) * np.ones(len(rd.bulk_vertices))
        v = v * diag ** fg.adj[i][i]
        v = v * ext_phi ** fg.legs[i]
        vecs.append(v)
    pairs = {}
    for i in range(fg.n_bulk):
        for j in range(i + 1, fg.n_bulk):
            if fg.adj[i][j]:
                pairs[(i, j)] = g ** fg.adj[i][j]
    base = _contract(vecs, pairs)
    if fg.bb_edges:
        base *= float(-(phi_y @ rd.dn @ phi_y)) ** fg.bb_edges
    return base


def weight_relative_poly(
    fg: FeynmanGraph, rd: RelativeGaussianData, pot: Potential
) -> dict[tuple[int, ...], float]:
    """Relative weight as a polynomial in the boundary field: exponent tuple
    over the boundary vertices -> coefficient.  Homogeneous of degree equal
    to the number of boundary vertices."""
    ny = len(rd.boundary_vertices)
    if fg.bb_edges:
        raise GraphQFTError("polynomial weights exclude boundary-boundary edges")
    g = rd.propagator
    diag = np.diag(g) if g.size else np.zeros(0)
    out: dict[tuple[int, ...], float] = {}
    leg_slots = [i for i in range(fg.n_bulk) for _ in range(fg.legs[i])]
    for assignment in itertools.product(range(ny), repeat=len(leg_slots)):
        exps = [0] * ny
        for y in assignment:
            exps[y] += 1
        vecs = []
        pos = 0
        leg_vec: dict[int, np.ndarray] = {}
        for slot, y in zip(leg_slots, assignment):
            leg_vec[slot] = leg_vec.get(slot, np.ones(len(rd.bulk_vertices))) * rd.ext[:, y]
        for i in range(fg.n_bulk):
            v = -pot.coupling(fg.valence(i)) * np.ones(len(rd.bulk_vertices))
            v = v * diag ** fg.adj[i][i]
            if i in leg_vec:
                v = v * leg_vec[i]
            vecs.append(v)
        pairs = {}
        for i in range(fg.n_bulk):
            for j in range(i + 1, fg.n_bulk):
                if fg.adj[i][j]:
                    pairs[(i, j)] = g ** fg.adj[i][j]
        val = _contract(vecs, pairs)
        key = tuple(exps)
        out[key] = out.get(key, 0.0) + val
    return out


def weight_first_quantized(
    fg: FeynmanGraph,
    g: Graph,
    m2: float,
    tolerance: float = 1e-10,
    marking: BoundaryMarking | None = None,
    pot: Potential | None = None,
    phi_y: np.ndarray | None = None,
) -> float:
    """Weight evaluated by substituting the certified truncated path-sum
    series for every edge factor (propagators on edges, extension sums on
    legs).  Per-edge tails are below the tolerance, so the weight differs
    from the matrix evaluation by at most about tolerance times the number
    of edges (times the scale of the other factors)."""
    pot = pot or Potential()
    per_edge_tol = tolerance
    if marking is None:
        if fg.n_boundary:
            raise GraphQFTError("boundary legs need a marking")
        prop = series_green(g, m2, per_edge_tol).value
        gd = GaussianData(g, m2, prop, float("nan"))
        return weight_closed(fg, gd, pot)
    rel = series_relative(g, marking, m2, per_edge_tol)
    rd = RelativeGaussianData(
        marking,
        m2,
        rel.bulk_vertices,
        rel.boundary_vertices,
        rel.propagator,
        float("nan"),
        rel.dn,
        rel.ext,
    )
    if phi_y is None:
        phi_y = np.zeros(len(rel.boundary_vertices))
    return weight_relative(fg, rd, pot, phi_y)


# ---------------------------------------------------------------------------
# Perturbative partition functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PertExpansion:
    value: float
    prefactor: float
    coefficients: dict[float, float]  # grading -> coefficient (prefactor excluded)
    log_value: float
    per_graph: list = field(default_factory=list)


def z_pert_closed(
    g: Graph,
    m2: float,
    pot: Potential,
    hbar: float,
    order: int,
    order_cap: int = DEFAULT_ORDER_CAP,
) -> PertExpansion:
    """det(K)^(-1/2) (1 + sum over vacuum diagrams of hbar^order Phi/|Aut|),
    truncated at the requested loop order.  The log expansion over connected
    diagrams only is returned alongside."""
    if order > order_cap:
        raise OrderTooLarge(f"order {order} above cap {order_cap}")
    gd = gaussian_data(g, m2)
    pref = gd.det_k ** -0.5
    coeffs: dict[float, float] = {0.0: 1.0}
    log_coeffs: dict[float, float] = {}
    rows = []
    if not pot.is_empty() and order >= 1:
        for fg in enumerate_feynman_graphs(order, "closed", pot.support(), order_cap):
            w = weight_closed(fg, gd, pot)
            o = float(fg.order_closed())
            coeffs[o] = coeffs.get(o, 0.0) + w / fg.aut
            if fg.is_connected():
                log_coeffs[o] = log_coeffs.get(o, 0.0) + w / fg.aut
            rows.append(
                {
                    "graph": fg.label(),
                    "aut": fg.aut,
                    "order": o,
                    "weight": w,
                    "connected": fg.is_connected(),
                }
            )
    series = sum(c * hbar**o for o, c in coeffs.items())
    log_series = sum(c * hbar**o for o, c in log_coeffs.items())
    return PertExpansion(
        pref * series, pref, coeffs, float(np.log(pref) + log_series), rows
    )


def z_pert_relative(
    g: Graph,
    y: BoundaryMarking,
    m2: float,
    pot: Potential,
    hbar: float,
    eta_y: np.ndarray,
    order: float,
    order_cap: float = DEFAULT_ORDER_CAP,
) -> PertExpansion:
    """Relative expansion in the rescaled boundary field phi = sqrt(hbar) eta.

    The prefactor carries det(K_rel)^(-1/2) and
    exp(-[quadratic DN form + boundary interaction]/(2 hbar)); diagrams are
    graded by |E|-|V_bulk|-|V_boundary|/2 so finitely many contribute at
    each order.
    """
    if order > order_cap:
        raise OrderTooLarge(f"order {order} above cap {order_cap}")
    rd = relative_data(g, y, m2)
    eta_y = np.asarray(eta_y, dtype=float)
    phi_y = np.sqrt(hbar) * eta_y
    k_y = kinetic(y.subgraph(), m2) if y.boundary_vertices else np.zeros((0, 0))
    quad = float(phi_y @ ((rd.dn - 0.5 * k_y) @ phi_y))
    s_int = float(sum(pot.value(p) for p in phi_y))
    pref = rd.det_k_rel ** -0.5 * np.exp(-(quad + s_int) / (2.0 * hbar))
    coeffs: dict[float, float] = {0.0: 1.0}
    rows = []
    if not pot.is_empty():
        for fg in enumerate_feynman_graphs(order, "relative", pot.support(), order_cap):
            o = fg.order_relative()
            if o > order:
                continue
            w = weight_relative(fg, rd, pot, phi_y)
            # Phi(sqrt(hbar) eta) = hbar^(V_bdry/2) Phi_eta, so the
            # hbar^(E-Vb-Vbdry) Phi(phi) term sits exactly at grading o.
            coeffs[o] = coeffs.get(o, 0.0) + w * hbar ** (-0.5 * fg.n_boundary) / fg.aut
            rows.append({"graph": fg.label(), "aut": fg.aut, "order": o, "weight": w})
    series = sum(c * hbar**o for o, c in coeffs.items())
    return PertExpansion(pref * series, pref, coeffs, float("nan"), rows)


# ---------------------------------------------------------------------------
# Decorations and cutting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Decoration:
    """Vertex side labels and per edge-slot cut labels for a vacuum diagram.

    Vertex labels: 'L', 'Y' or 'R'.  Edge slots list every parallel copy and
    loop separately; labels are 'u' (uncut, same strict side only) or 'c'.
    """

    vertex_labels: tuple[str, ...]
    edge_labels: tuple[str, ...]


def _edge_slots(fg: FeynmanGraph) -> list[tuple[int, int]]:
    slots = []
    for i in range(fg.n_bulk):
        slots.extend([(i, i)] * fg.adj[i][i])
        for j in range(i + 1, fg.n_bulk):
            slots.extend([(i, j)] * fg.adj[i][j])
    return slots


def enumerate_decorations(fg: FeynmanGraph) -> list[Decoration]:
    slots = _edge_slots(fg)
    out = []
    for vlabels in itertools.product("LYR", repeat=fg.n_bulk):
        options = []
        for i, j in slots:
            same_strict = vlabels[i] == vlabels[j] and vlabels[i] in ("L", "R")
            options.append(("u", "c") if same_strict else ("c",))
        for elabels in itertools.product(*options):
            out.append(Decoration(vlabels, elabels))
    return out


@dataclass(frozen=True)
class DecorationSplitReport:
    total_weight: float
    decorated_sum: float
    residual: float
    n_decorations: int
    groups: dict  # (left label, right label, Y degrees) -> summed weight


def decoration_split(
    fg: FeynmanGraph,
    spec: GluingSpec,
    m2: float,
    pot: Potential,
) -> DecorationSplitReport:
    """Split a vacuum diagram's weight on X = X' u_Y X'' over all decorations
    and check the sum against the undecorated weight.

    Decorated weights use the Dirichlet propagators of the sides for uncut
    edges and extension-DN-extension sandwiches for cut edges, with identity
    extension on interface-labeled vertices.  Groups collect the cut data:
    the two residual relative diagrams and the interface vertex degrees.
    """
    res = glue(spec)
    glued = res.graph
    gd = gaussian_data(glued, m2)
    left = relative_data(spec.left.graph, spec.left, m2)
    right = relative_data(spec.right.graph, spec.right, m2)
    dn_tot, y_order = total_dn_operator(left, right, spec)
    dn_inv = linalg.inverse(dn_tot)

    n = glued.n
    y_glued = [glued.index(v) for v in y_order]
    left_bulk = [glued.index(res.left_map[v]) for v in left.bulk_vertices]
    right_bulk = [glued.index(res.right_map[v]) for v in right.bulk_vertices]

    masks = {
        "L": np.zeros(n),
        "Y": np.zeros(n),
        "R": np.zeros(n),
    }
    masks["L"][left_bulk] = 1.0
    masks["Y"][y_glued] = 1.0
    masks["R"][right_bulk] = 1.0

    g_u = {
        "L": np.zeros((n, n)),
        "R": np.zeros((n, n)),
    }
    g_u["L"][np.ix_(left_bulk, left_bulk)] = left.propagator
    g_u["R"][np.ix_(right_bulk, right_bulk)] = right.propagator

    e_pad = {lbl: np.zeros((n, len(y_order))) for lbl in "LYR"}
    col_l = [left.boundary_index(v) for v in y_order]
    e_pad["L"][left_bulk, :] = left.ext[:, col_l]
    col_r = [right.boundary_index(spec.identification[v]) for v in y_order]
    e_pad["R"][right_bulk, :] = right.ext[:, col_r]
    e_pad["Y"][y_glued, :] = np.eye(len(y_order))

    g_c = {
        (a, b): e_pad[a] @ dn_inv @ e_pad[b].T for a in "LYR" for b in "LYR"
    }

    slots = _edge_slots(fg)
    total = weight_closed(fg, gd, pot)
    dec_sum = 0.0
    groups: dict = {}
    for dec in enumerate_decorations(fg):
        vecs = []
        for i in range(fg.n_bulk):
            v = -pot.coupling(fg.valence(i)) * masks[dec.vertex_labels[i]]
            vecs.append(np.array(v))
        pair_products: dict[tuple[int, int], np.ndarray] = {}
        diag_factor = [np.ones(n) for _ in range(fg.n_bulk)]
        for (i, j), lbl in zip(slots, dec.edge_labels):
            if lbl == "u":
                mat = g_u[dec.vertex_labels[i]]
            else:
                mat = g_c[(dec.vertex_labels[i], dec.vertex_labels[j])]
            if i == j:
                diag_factor[i] = diag_factor[i] * np.diag(mat)
            else:
                key = (i, j)
                pair_products[key] = (
                    pair_products[key] * mat if key in pair_products else np.array(mat)
                )
        for i in range(fg.n_bulk):
            vecs[i] = vecs[i] * diag_factor[i]
        w = _contract(vecs, pair_products)
        dec_sum += w
        gkey = _cut_signature(fg, dec)
        groups[gkey] = groups.get(gkey, 0.0) + w
    return DecorationSplitReport(
        total, dec_sum, abs(total - dec_sum), len(list(enumerate_decorations(fg))), groups
    )


def _cut_signature(fg: FeynmanGraph, dec: Decoration) -> tuple:
    """Canonical record of the pieces a decoration cuts into: the relative
    diagram left of the interface, the one right of it, and the multiset of
    interface vertex degrees (which become potential insertions)."""
    slots = _edge_slots(fg)

    def side_graph(side: str) -> tuple:
        keep = [i for i in range(fg.n_bulk) if dec.vertex_labels[i] == side]
        pos = {v: k for k, v in enumerate(keep)}
        adj = [[0] * len(keep) for _ in keep]
        legs = [0] * len(keep)
        for (i, j), lbl in zip(slots, dec.edge_labels):
            si, sj = dec.vertex_labels[i], dec.vertex_labels[j]
            if lbl == "u":
                if si == side and sj == side:
                    adj[pos[i]][pos[j]] += 1
                    if i != j:
                        adj[pos[j]][pos[i]] += 1
            elif i == j:
                if si == side:
                    legs[pos[i]] += 2  # a cut loop yields two legs
            else:
                if si == side:
                    legs[pos[i]] += 1
                if sj == side:
                    legs[pos[j]] += 1
        fg_side = FeynmanGraph(tuple(tuple(r) for r in adj), tuple(legs))
        return fg_side.canonical_key()

    y_degrees = tuple(
        sorted(fg.valence(i) for i in range(fg.n_bulk) if dec.vertex_labels[i] == "Y")
    )
    return (side_graph("L"), side_graph("R"), y_degrees)


# ---------------------------------------------------------------------------
# Gluing of perturbative partition functions
# ---------------------------------------------------------------------------

def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            key = tuple(x + y for x, y in zip(ka, kb))
            out[key] = out.get(key, 0.0) + va * vb
    return out


def _gaussian_moment(cov: np.ndarray, exps: tuple[int, ...]) -> float:
    """Centered Gaussian moment E[prod x_i^a_i] for unit-hbar covariance."""
    if sum(exps) % 2 == 1:
        return 0.0

    from functools import lru_cache

    @lru_cache(maxsize=None)
    def rec(alpha: tuple[int, ...]) -> float:
        total = sum(alpha)
        if total == 0:
            return 1.0
        i = next(k for k, a in enumerate(alpha) if a > 0)
        out = 0.0
        for j, aj in enumerate(alpha):
            mult = aj - (1 if j == i else 0)
            if mult <= 0:
                continue
            reduced = list(alpha)
            reduced[i] -= 1
            reduced[j] -= 1
            out += mult * cov[i, j] * rec(tuple(reduced))
        return out

    return rec(tuple(exps))


def _insertion_multisets(pot: Potential, budget: float):
    """Multisets of interaction degrees with sum(k/2 - 1) <= budget, as
    count dictionaries degree -> multiplicity.  Each degree costs k/2 - 1,
    so the recursion extends only with degrees >= the current maximum and
    every multiset appears once."""
    degrees = pot.support()
    out = []
    frontier = [({}, 0.0)]
    while frontier:
        counts, used = frontier.pop()
        out.append(counts)
        lo = max(counts) if counts else min(degrees, default=0)
        for d in (x for x in degrees if x >= lo):
            cost = d / 2.0 - 1.0
            if used + cost > budget + 1e-12:
                continue
            new = dict(counts)
            new[d] = new.get(d, 0) + 1
            frontier.append((new, used + cost))
    return out


@dataclass(frozen=True)
class PertGluingReport:
    orders: tuple[float, ...]
    lhs_coefficients: dict[float, float]
    rhs_coefficients: dict[float, float]
    max_abs_residual: float
    by_pair: dict


def pert_gluing_check(
    spec: GluingSpec,
    m2: float,
    pot: Potential,
    order: int = 2,
    order_cap: float = DEFAULT_ORDER_CAP,
) -> PertGluingReport:
    """Order-by-order identity between the closed expansion on the glued
    graph and the boundary-field integral of the two relative expansions.

    The right side is assembled combinatorially: pairs of relative diagrams
    on the two sides, any multiset of interface potential insertions, and
    all Wick pairings of the boundary fields against the inverse total DN
    operator.  Contributions are grouped by the (left diagram, right
    diagram, insertion degrees) triple, realizing the correspondence between
    decorated diagrams and cut pairs.
    """
    if order > order_cap:
        raise OrderTooLarge(f"order {order} above cap {order_cap}")
    res = glue(spec)
    left = relative_data(spec.left.graph, spec.left, m2)
    right = relative_data(spec.right.graph, spec.right, m2)
    dn_tot, y_order = total_dn_operator(left, right, spec)
    cov = linalg.inverse(dn_tot)
    ny = len(y_order)

    lhs = z_pert_closed(res.graph, m2, pot, 1.0, order, order_cap=order).coefficients

    # Relative diagrams on each side, with weights as polynomials over Y in
    # the shared y_order.
    def side_polys(rel: RelativeGaussianData, realign: list[int]):
        items = [(EMPTY_GRAPH, 0.0, {(0,) * ny: 1.0})]
        if pot.is_empty():
            return items
        for fg in enumerate_feynman_graphs(order, "relative", pot.support(), order_cap):
            rho = fg.order_relative()
            if rho > order:
                continue
            poly = _realign_poly(weight_relative_poly(fg, rel, pot), realign)
            items.append((fg, rho, poly))
        return items

    # Boundary columns follow each side's own vertex order; realign both
    # onto the shared sorted order of the left marking.
    left_perm = [left.boundary_vertices.index(v) for v in y_order]
    right_perm = [
        right.boundary_vertices.index(spec.identification[v]) for v in y_order
    ]
    left_items = side_polys(left, left_perm)
    right_items = side_polys(right, right_perm)

    insertions = _insertion_multisets(pot, float(order))

    rhs: dict[float, float] = {}
    by_pair: dict = {}
    for fg_l, rho_l, poly_l in left_items:
        for fg_r, rho_r, poly_r in right_items:
            if rho_l + rho_r > order + 1e-9:
                continue
            base = _poly_mul(poly_l, poly_r)
            for counts in insertions:
                rho_ins = sum(c * (d / 2.0 - 1.0) for d, c in counts.items())
                o = rho_l + rho_r + rho_ins
                if o > order + 1e-9 or abs(o - round(o)) > 1e-9:
                    continue
                poly = dict(base)
                pref = 1.0 / (fg_l.aut * fg_r.aut)
                for d, c in sorted(counts.items()):
                    single = {}
                    for yi in range(ny):
                        e = [0] * ny
                        e[yi] = d
                        single[tuple(e)] = -pot.coupling(d) / math.factorial(d)
                    for _ in range(c):
                        poly = _poly_mul(poly, single)
                    pref /= math.factorial(c)
                val = 0.0
                for exps, coeff in poly.items():
                    val += coeff * _gaussian_moment(cov, exps)
                contribution = pref * val
                if contribution != 0.0:
                    o = float(round(o))
                    rhs[o] = rhs.get(o, 0.0) + contribution
                    key = (
                        fg_l.label(),
                        fg_r.label(),
                        tuple(sorted(counts.items())),
                    )
                    by_pair[key] = by_pair.get(key, 0.0) + contribution

    orders = tuple(sorted({float(o) for o in range(order + 1)}))
    resid = max(
        abs(lhs.get(o, 0.0) - rhs.get(o, 0.0)) for o in orders
    )
    return PertGluingReport(orders, lhs, rhs, resid, by_pair)


def _realign_poly(poly: dict, perm: list[int]) -> dict:
    return {tuple(exps[perm[i]] for i in range(len(perm))): v for exps, v in poly.items()}


def boundary_edge_convention_check(
    rd: RelativeGaussianData, phi_y: np.ndarray, hbar: float, max_terms: int = 6
) -> dict:
    """The alternative convention trades the DN prefactor for diagrams made
    of isolated boundary-boundary edges.  Partial sums over those diagrams,
    weighted hbar^(E-V) (-DN) per edge and divided by dart automorphisms,
    must converge to exp(-(phi, DN phi)/(2 hbar))."""
    phi_y = np.asarray(phi_y, dtype=float)
    target = float(np.exp(-(phi_y @ rd.dn @ phi_y) / (2.0 * hbar)))
    quad = float(-(phi_y @ rd.dn @ phi_y))
    partial = 0.0
    partials = []
    for j in range(max_terms + 1):
        fg = FeynmanGraph((), (), bb_edges=j)
        weight = quad**j  # product over edges of -(phi, DN phi) terms, summed
        partial += (hbar ** -j) * weight / fg.aut
        partials.append(partial)
    return {"target": target, "partials": partials, "residual": abs(partials[-1] - target)}
