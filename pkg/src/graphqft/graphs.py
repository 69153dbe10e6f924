"""Finite multigraphs with marked boundary subgraphs, gluings and matrix assembly.

Vertices carry opaque string ids and are kept in sorted order, so every
matrix built from a graph has a reproducible row/column indexing.  Edges are
an unordered multiset of vertex pairs; a pair ``(v, v)`` is a short loop.
Short loops are stored but never enter the Laplacian or any path count:
``valence`` reports the loop-free degree used by all weight systems, while
``raw_valence`` counts loop ends as well.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    GraphQFTError,
    IdentificationMismatch,
    NonPositiveMass,
    OverlappingMarkings,
)

Edge = tuple[str, str]


def _normalize_edge(a: str, b: str) -> Edge:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class Graph:
    """Immutable finite multigraph (possibly with short loops)."""

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]

    def __init__(self, vertices: Iterable[str], edges: Iterable[Sequence[str]] = ()):
        vs = tuple(sorted(vertices))
        if len(set(vs)) != len(vs):
            raise GraphQFTError(f"duplicate vertex ids: {vs}")
        es = tuple(sorted(_normalize_edge(a, b) for a, b in edges))
        vset = set(vs)
        for a, b in es:
            if a not in vset or b not in vset:
                raise GraphQFTError(f"edge ({a},{b}) has undeclared endpoint")
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", es)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def index(self, v: str) -> int:
        return self._index[v]

    @cached_property
    def _index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def loop_count(self, v: str) -> int:
        return sum(1 for a, b in self.edges if a == b == v)

    def valence(self, v: str) -> int:
        """Loop-free degree: the valence entering Laplacians and path weights."""
        return sum(1 for a, b in self.edges if a != b and v in (a, b))

    def raw_valence(self, v: str) -> int:
        """Degree counting both ends of short loops."""
        return self.valence(v) + 2 * self.loop_count(v)

    @cached_property
    def incident(self) -> dict[str, tuple[tuple[int, str], ...]]:
        """Per vertex: (edge index, other endpoint) for non-loop edges, sorted."""
        table: dict[str, list[tuple[int, str]]] = {v: [] for v in self.vertices}
        for i, (a, b) in enumerate(self.edges):
            if a == b:
                continue
            table[a].append((i, b))
            table[b].append((i, a))
        return {v: tuple(sorted(hits, key=lambda t: t[0])) for v, hits in table.items()}

    def adjacency(self) -> np.ndarray:
        """Edge-count matrix; the diagonal is zero even in presence of loops."""
        a = np.zeros((self.n, self.n), dtype=np.int64)
        for u, v in self.edges:
            if u == v:
                continue
            i, j = self.index(u), self.index(v)
            a[i, j] += 1
            a[j, i] += 1
        return a

    def laplacian(self) -> np.ndarray:
        """diag(loop-free valence) - adjacency; equals d^T d for the coboundary d."""
        a = self.adjacency()
        return np.diag(a.sum(axis=1)) - a

    def valence_vector(self) -> np.ndarray:
        return np.array([self.valence(v) for v in self.vertices], dtype=np.int64)

    def edge_multiset(self) -> Counter:
        return Counter(self.edges)

    def without_vertices(self, removed: Iterable[str]) -> "Graph":
        """Induced subgraph after deleting ``removed`` and all incident edges."""
        gone = set(removed)
        keep = [v for v in self.vertices if v not in gone]
        edges = [e for e in self.edges if e[0] not in gone and e[1] not in gone]
        return Graph(keep, edges)


def kinetic(g: Graph, m2: float) -> np.ndarray:
    """Laplacian plus m^2 times identity; positive definite for m2 > 0."""
    if m2 <= 0:
        raise NonPositiveMass(f"m2 must be > 0, got {m2}")
    return g.laplacian().astype(float) + m2 * np.eye(g.n)


@dataclass(frozen=True)
class BoundaryMarking:
    """A marked subgraph Y of a host graph X.

    Markings are honest subgraphs: every marked edge has both endpoints
    marked, and marked edges form a sub-multiset of the host's edges.
    """

    graph: Graph
    boundary_vertices: frozenset[str]
    boundary_edges: tuple[Edge, ...]

    def __init__(
        self,
        graph: Graph,
        vertices: Iterable[str],
        edges: Iterable[Sequence[str]] = (),
    ):
        vset = frozenset(vertices)
        if not vset <= set(graph.vertices):
            raise GraphQFTError(f"marked vertices {vset - set(graph.vertices)} not in graph")
        es = tuple(sorted(_normalize_edge(a, b) for a, b in edges))
        for a, b in es:
            if a not in vset or b not in vset:
                raise GraphQFTError(f"marked edge ({a},{b}) has an unmarked endpoint")
        if Counter(es) - graph.edge_multiset():
            raise GraphQFTError("marked edges exceed the host graph's edge multiset")
        object.__setattr__(self, "graph", graph)
        object.__setattr__(self, "boundary_vertices", vset)
        object.__setattr__(self, "boundary_edges", es)

    def subgraph(self) -> Graph:
        return Graph(self.boundary_vertices, self.boundary_edges)

    @property
    def sorted_vertices(self) -> tuple[str, ...]:
        return tuple(sorted(self.boundary_vertices))

    def is_empty(self) -> bool:
        return not self.boundary_vertices


def block_indices(marking: BoundaryMarking) -> tuple[list[int], list[int]]:
    """Bulk and boundary index lists, each in canonical (sorted-id) order."""
    g = marking.graph
    bulk = [i for i, v in enumerate(g.vertices) if v not in marking.boundary_vertices]
    bdry = [i for i, v in enumerate(g.vertices) if v in marking.boundary_vertices]
    return bulk, bdry


@dataclass(frozen=True)
class Cobordism:
    """A graph with disjoint in- and out-boundary subgraphs."""

    graph: Graph
    in_marking: BoundaryMarking
    out_marking: BoundaryMarking

    def __post_init__(self):
        if self.in_marking.graph != self.graph or self.out_marking.graph != self.graph:
            raise GraphQFTError("markings must live on the cobordism's graph")
        if self.in_marking.boundary_vertices & self.out_marking.boundary_vertices:
            raise OverlappingMarkings("in- and out-markings share vertices")

    def boundary_marking(self) -> BoundaryMarking:
        """The union marking Y_in ⊔ Y_out."""
        return BoundaryMarking(
            self.graph,
            self.in_marking.boundary_vertices | self.out_marking.boundary_vertices,
            self.in_marking.boundary_edges + self.out_marking.boundary_edges,
        )


@dataclass(frozen=True)
class GluingSpec:
    """Two graphs with isomorphic marked subgraphs and the identification map.

    ``identification`` sends marked vertices of the left graph to marked
    vertices of the right graph.  It must be a bijection matching the two
    marked edge multisets (the induced edge bijection is determined up to
    permutations of parallel edges, which no downstream quantity sees).
    """

    left: BoundaryMarking
    right: BoundaryMarking
    identification: Mapping[str, str]

    def __post_init__(self):
        ident = dict(self.identification)
        if set(ident) != self.left.boundary_vertices:
            raise IdentificationMismatch("identification keys must be the left marked vertices")
        if set(ident.values()) != self.right.boundary_vertices or len(
            set(ident.values())
        ) != len(ident):
            raise IdentificationMismatch("identification must biject onto the right marked vertices")
        mapped = Counter(
            _normalize_edge(ident[a], ident[b]) for a, b in self.left.boundary_edges
        )
        if mapped != Counter(self.right.boundary_edges):
            raise IdentificationMismatch("identification does not match the marked edge multisets")
        object.__setattr__(self, "identification", dict(ident))


@dataclass(frozen=True)
class GlueResult:
    graph: Graph
    left_map: dict[str, str]
    right_map: dict[str, str]
    interface: BoundaryMarking  # the copy of Y inside the glued graph


def glue(spec: GluingSpec) -> GlueResult:
    """Pushout of the two graphs along the identified subgraph.

    Left vertex ids survive unchanged; a right bulk vertex keeps its id
    unless that collides with a left id, in which case it is prefixed with
    ``R.`` (repeatedly, until unique).  The glued edge multiset is the
    disjoint union of both sides' edges minus one copy of the marked edges.
    """
    left_g = spec.left.graph
    right_g = spec.right.graph
    inverse = {w: v for v, w in spec.identification.items()}

    left_map = {v: v for v in left_g.vertices}
    used = set(left_g.vertices)
    right_map: dict[str, str] = {}
    for w in right_g.vertices:
        if w in inverse:
            right_map[w] = inverse[w]
            continue
        name = w
        while name in used:
            name = "R." + name
        right_map[w] = name
        used.add(name)

    edges = [e for e in left_g.edges]
    right_edges = Counter(right_g.edges) - Counter(spec.right.boundary_edges)
    for (a, b), k in sorted(right_edges.items()):
        edges.extend([(right_map[a], right_map[b])] * k)

    glued = Graph(used, edges)
    interface = BoundaryMarking(
        glued, spec.left.boundary_vertices, spec.left.boundary_edges
    )
    return GlueResult(glued, left_map, right_map, interface)


@dataclass(frozen=True)
class SelfGlueResult:
    graph: Graph
    vertex_map: dict[str, str]
    marking: BoundaryMarking  # the merged copy of Y1 inside the quotient


def self_glue(
    g: Graph, y1: BoundaryMarking, y2: BoundaryMarking, f: Mapping[str, str]
) -> SelfGlueResult:
    """Quotient of ``g`` identifying the disjoint markings ``y1`` and ``y2`` via ``f``.

    The merged vertices keep the ids of ``y1``.  Paired marked edges collapse
    to a single edge; an edge of ``g`` joining a vertex to its partner becomes
    a short loop, and distinct cross edges between the two markings become
    parallel edges of the merged marking.
    """
    if y1.graph != g or y2.graph != g:
        raise GraphQFTError("markings must live on the given graph")
    if y1.boundary_vertices & y2.boundary_vertices:
        raise OverlappingMarkings("the two markings share vertices")
    fmap = dict(f)
    if set(fmap) != y1.boundary_vertices or set(fmap.values()) != y2.boundary_vertices:
        raise IdentificationMismatch("f must biject the first marking onto the second")
    mapped = Counter(_normalize_edge(fmap[a], fmap[b]) for a, b in y1.boundary_edges)
    if mapped != Counter(y2.boundary_edges):
        raise IdentificationMismatch("f does not match the marked edge multisets")

    inv = {w: v for v, w in fmap.items()}
    proj = {v: inv.get(v, v) for v in g.vertices}

    # Drop one copy of each identified marked edge, then rename endpoints.
    kept = Counter(g.edges) - Counter(y2.boundary_edges)
    edges = []
    for (a, b), k in sorted(kept.items()):
        edges.extend([_normalize_edge(proj[a], proj[b])] * k)
    quotient = Graph([v for v in g.vertices if v not in y2.boundary_vertices], edges)

    # Marked subgraph of the quotient: y1's edges plus the collapsed cross edges.
    cross = [
        _normalize_edge(proj[a], proj[b])
        for a, b in g.edges
        if (a in y1.boundary_vertices and b in y2.boundary_vertices)
        or (a in y2.boundary_vertices and b in y1.boundary_vertices)
    ]
    marking = BoundaryMarking(
        quotient, y1.boundary_vertices, list(y1.boundary_edges) + cross
    )
    return SelfGlueResult(quotient, proj, marking)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def _ids(n: int) -> list[str]:
    width = len(str(n))
    return [str(i).zfill(width) for i in range(1, n + 1)]


def line_graph(n: int) -> Graph:
    vs = _ids(n)
    return Graph(vs, [(vs[i], vs[i + 1]) for i in range(n - 1)])


def circle_graph(n: int) -> Graph:
    vs = _ids(n)
    edges = [(vs[i], vs[(i + 1) % n]) for i in range(n)]
    return Graph(vs, edges)


def grid_graph(rows: int, cols: int) -> Graph:
    w_r, w_c = len(str(rows - 1)), len(str(cols - 1))
    name = lambda i, j: f"r{str(i).zfill(w_r)}c{str(j).zfill(w_c)}"
    vs = [name(i, j) for i in range(rows) for j in range(cols)]
    edges = []
    for i in range(rows):
        for j in range(cols):
            if i + 1 < rows:
                edges.append((name(i, j), name(i + 1, j)))
            if j + 1 < cols:
                edges.append((name(i, j), name(i, j + 1)))
    return Graph(vs, edges)


def grid_boundary_marking(g: Graph, rows: int, cols: int) -> BoundaryMarking:
    """Marking given by the outer ring of a grid graph, with its ring edges."""
    w_r, w_c = len(str(rows - 1)), len(str(cols - 1))
    name = lambda i, j: f"r{str(i).zfill(w_r)}c{str(j).zfill(w_c)}"
    ring = {
        name(i, j)
        for i in range(rows)
        for j in range(cols)
        if i in (0, rows - 1) or j in (0, cols - 1)
    }
    edges = [e for e in g.edges if e[0] in ring and e[1] in ring]
    return BoundaryMarking(g, ring, edges)


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def graph_to_obj(g: Graph, boundary: BoundaryMarking | None = None) -> dict:
    obj: dict = {
        "vertices": list(g.vertices),
        "edges": [list(e) for e in g.edges],
    }
    if boundary is not None:
        obj["boundary"] = {
            "vertices": boundary.sorted_vertices and list(boundary.sorted_vertices) or [],
            "edges": [list(e) for e in boundary.boundary_edges],
        }
    return obj


def graph_from_obj(obj: Mapping) -> tuple[Graph, BoundaryMarking | None]:
    g = Graph(obj["vertices"], obj.get("edges", []))
    boundary = None
    if "boundary" in obj:
        b = obj["boundary"]
        boundary = BoundaryMarking(g, b.get("vertices", []), b.get("edges", []))
    return g, boundary


def cobordism_to_obj(c: Cobordism) -> dict:
    obj = graph_to_obj(c.graph)
    obj["in"] = {
        "vertices": list(c.in_marking.sorted_vertices),
        "edges": [list(e) for e in c.in_marking.boundary_edges],
    }
    obj["out"] = {
        "vertices": list(c.out_marking.sorted_vertices),
        "edges": [list(e) for e in c.out_marking.boundary_edges],
    }
    return obj


def cobordism_from_obj(obj: Mapping) -> Cobordism:
    g = Graph(obj["vertices"], obj.get("edges", []))
    mk = lambda key: BoundaryMarking(
        g, obj[key].get("vertices", []), obj[key].get("edges", [])
    )
    return Cobordism(g, mk("in"), mk("out"))


def dumps(g: Graph, boundary: BoundaryMarking | None = None) -> str:
    """Canonical JSON text: sorted keys, compact separators, trailing newline."""
    return json.dumps(graph_to_obj(g, boundary), sort_keys=True, separators=(",", ":")) + "\n"


def loads(text: str) -> tuple[Graph, BoundaryMarking | None]:
    return graph_from_obj(json.loads(text))
