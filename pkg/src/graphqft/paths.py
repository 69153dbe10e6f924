"""Paths, hesitant paths and cycle classes, with their weight systems.

A path alternates vertices and edge indices, never traverses a short loop,
and never repeats a vertex consecutively.  A hesitant path (h-path)
additionally may stay at a vertex while consuming any incident edge; the
number of stays is its hesitation count.  Closed (h-)paths modulo cyclic
shifts are cycle classes; the traversal count t divides the length.

Weights:
    s(h-path) = (m^-2)^length * (-1)^hesitations        (multiplicative)
    w(path)   = prod over visited vertices of 1/(m^2 + val)
    w'(closed path) = w with one endpoint factor dropped

Relative variants skip marked vertices in the product but keep the full
valence of the host graph.  Exact arithmetic uses Fractions with a rational
m^2 so coefficient-level identities can be checked without rounding.

Restricted families relative to a marking Y (occurrences counted along the
vertex sequence):
    avoidY        every position off Y
    firstHitY     only the final position on Y (constant path when the two
                  endpoints coincide on Y)
    YtoYinterior  only the first and last positions on Y
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Literal

from .errors import GraphQFTError
from .graphs import BoundaryMarking, Graph

PathMode = Literal["all", "avoidY", "firstHitY", "YtoYinterior"]


@dataclass(frozen=True)
class Path:
    """Alternating vertex/edge sequence with distinct consecutive vertices."""

    graph: Graph
    vertices: tuple[str, ...]
    edges: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertices) != len(self.edges) + 1:
            raise GraphQFTError("path must alternate vertices and edges")
        for i, e in enumerate(self.edges):
            a, b = self.graph.edges[e]
            if a == b:
                raise GraphQFTError("paths may not traverse short loops")
            if {self.vertices[i], self.vertices[i + 1]} != {a, b}:
                raise GraphQFTError(f"edge {e} does not join step {i}")
            if self.vertices[i] == self.vertices[i + 1]:
                raise GraphQFTError("consecutive path vertices must differ")

    @property
    def length(self) -> int:
        return len(self.edges)

    def is_closed(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    def reverse(self) -> "Path":
        return Path(self.graph, self.vertices[::-1], self.edges[::-1])

    def concat(self, other: "Path") -> "Path":
        if self.vertices[-1] != other.vertices[0]:
            raise GraphQFTError("paths do not share a junction vertex")
        return Path(self.graph, self.vertices + other.vertices[1:], self.edges + other.edges)


@dataclass(frozen=True)
class HPath:
    """Hesitant path: steps may stay put while consuming an incident edge."""

    graph: Graph
    vertices: tuple[str, ...]
    edges: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertices) != len(self.edges) + 1:
            raise GraphQFTError("h-path must alternate vertices and edges")
        for i, e in enumerate(self.edges):
            a, b = self.graph.edges[e]
            if a == b:
                raise GraphQFTError("h-paths may not traverse short loops")
            u, v = self.vertices[i], self.vertices[i + 1]
            if u == v:
                if u not in (a, b):
                    raise GraphQFTError(f"hesitation edge {e} not incident to {u}")
            elif {u, v} != {a, b}:
                raise GraphQFTError(f"edge {e} does not join step {i}")

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def hesitations(self) -> int:
        return sum(1 for i in range(self.length) if self.vertices[i] == self.vertices[i + 1])

    @property
    def degree(self) -> int:
        return self.length - self.hesitations

    def is_closed(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    def concat(self, other: "HPath") -> "HPath":
        if self.vertices[-1] != other.vertices[0]:
            raise GraphQFTError("h-paths do not share a junction vertex")
        return HPath(self.graph, self.vertices + other.vertices[1:], self.edges + other.edges)

    def project(self) -> Path:
        """Forget hesitations; the underlying path has length = degree."""
        vs = [self.vertices[0]]
        es = []
        for i, e in enumerate(self.edges):
            if self.vertices[i] != self.vertices[i + 1]:
                vs.append(self.vertices[i + 1])
                es.append(e)
        return Path(self.graph, tuple(vs), tuple(es))


def _steps(walk: Path | HPath) -> tuple[tuple[str, int], ...]:
    return tuple(zip(walk.vertices[:-1], walk.edges))


def traversal_count(walk: Path | HPath) -> int:
    """Order of the cyclic stabilizer of a closed (h-)path."""
    if not walk.is_closed():
        raise GraphQFTError("traversal count is defined for closed walks only")
    steps = _steps(walk)
    k = len(steps)
    if k == 0:
        return 1
    return sum(1 for d in range(k) if steps[d:] + steps[:d] == steps)


def cyclic_shifts(walk: Path | HPath) -> list:
    """All distinct cyclic rotations of a closed walk (its cycle-class orbit)."""
    if not walk.is_closed():
        raise GraphQFTError("cyclic shifts are defined for closed walks only")
    steps = _steps(walk)
    k = len(steps)
    if k == 0:
        return [walk]
    cls = type(walk)
    seen = set()
    out = []
    for d in range(k):
        rot = steps[d:] + steps[:d]
        if rot in seen:
            continue
        seen.add(rot)
        vs = tuple(v for v, _ in rot) + (rot[0][0],)
        es = tuple(e for _, e in rot)
        out.append(cls(walk.graph, vs, es))
    return out


@dataclass(frozen=True)
class CycleClass:
    """Closed (h-)path modulo cyclic shifts, keyed by the minimal rotation."""

    representative: Path | HPath

    @staticmethod
    def of(walk: Path | HPath) -> "CycleClass":
        best = min(cyclic_shifts(walk), key=_steps)
        return CycleClass(best)

    @property
    def length(self) -> int:
        return self.representative.length

    @property
    def traversals(self) -> int:
        return traversal_count(self.representative)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def _family_guard(mode: PathMode, u: str, v: str, y: frozenset[str]) -> bool:
    """Whether (u, v) are admissible endpoints for the family at all."""
    if mode == "all":
        return True
    if mode == "avoidY":
        return u not in y and v not in y
    if mode == "firstHitY":
        return v in y
    if mode == "YtoYinterior":
        return u in y and v in y
    raise GraphQFTError(f"unknown path mode {mode}")


def enumerate_paths(
    g: Graph,
    u: str,
    v: str,
    max_len: int,
    mode: PathMode = "all",
    marking: BoundaryMarking | None = None,
) -> Iterator[Path]:
    """All paths from u to v of length <= max_len, in lexicographic order of
    the (vertex, edge) step sequence.  Parallel edges give distinct paths."""
    y = marking.boundary_vertices if marking is not None else frozenset()
    if mode != "all" and marking is None:
        raise GraphQFTError(f"mode {mode} needs a boundary marking")
    if not _family_guard(mode, u, v, y):
        return
    if mode == "firstHitY" and u in y:
        # By convention the family from a marked start holds just the
        # constant path at that vertex.
        if u == v:
            yield Path(g, (u,), ())
        return

    def rec(vs: tuple[str, ...], es: tuple[int, ...]) -> Iterator[Path]:
        here = vs[-1]
        length = len(es)
        if here == v and (mode != "YtoYinterior" or length >= 1):
            yield Path(g, vs, es)
        if length == max_len:
            return
        if mode in ("firstHitY", "YtoYinterior") and here in y and length >= 1:
            return  # marked vertices terminate these families
        for edge_idx, other in sorted(g.incident[here], key=lambda t: (t[1], t[0])):
            if other in y:
                if mode == "avoidY":
                    continue
                if mode in ("firstHitY", "YtoYinterior") and other != v:
                    continue
            yield from rec(vs + (other,), es + (edge_idx,))

    yield from rec((u,), ())


def enumerate_hpaths(
    g: Graph,
    u: str,
    v: str,
    length: int,
    mode: PathMode = "all",
    marking: BoundaryMarking | None = None,
) -> Iterator[HPath]:
    """All h-paths of exactly the given length.  Hesitation steps count as
    occurrences of the vertex they stay at; edges consumed while hesitating
    may point anywhere, including across the marking."""
    y = marking.boundary_vertices if marking is not None else frozenset()
    if mode != "all" and marking is None:
        raise GraphQFTError(f"mode {mode} needs a boundary marking")
    if not _family_guard(mode, u, v, y):
        return
    if mode == "firstHitY" and u in y:
        if u == v and length == 0:
            yield HPath(g, (u,), ())
        return

    def rec(vs: tuple[str, ...], es: tuple[int, ...]) -> Iterator[HPath]:
        here = vs[-1]
        done = len(es) == length
        if done:
            if here == v and (mode != "YtoYinterior" or length >= 1):
                yield HPath(g, vs, es)
            return
        if mode in ("firstHitY", "YtoYinterior") and here in y and len(es) >= 1:
            return
        is_last = len(es) + 1 == length
        options: list[tuple[str, int]] = []
        for edge_idx, other in g.incident[here]:
            options.append((here, edge_idx))
            options.append((other, edge_idx))
        for w, edge_idx in sorted(options):
            if w in y:
                if mode == "avoidY":
                    continue
                if mode in ("firstHitY", "YtoYinterior") and not (is_last and w == v):
                    continue
            yield from rec(vs + (w,), es + (edge_idx,))

    yield from rec((u,), ())


# ---------------------------------------------------------------------------
# Weight systems
# ---------------------------------------------------------------------------

def s_weight(walk: HPath, m2: Fraction | float) -> Fraction | float:
    """(m^-2)^length * (-1)^hesitations; multiplicative under concatenation."""
    inv = (Fraction(1, 1) / m2) if isinstance(m2, Fraction) else 1.0 / m2
    return inv**walk.length * (-1) ** walk.hesitations


def w_weight(
    path: Path, m2: Fraction | float, skip: frozenset[str] = frozenset()
) -> Fraction | float:
    """Product of 1/(m^2+val) over the visited vertex sequence, skipping
    marked vertices for the relative variant.  Valence is taken in the host
    graph regardless of the marking."""
    one = Fraction(1, 1) if isinstance(m2, Fraction) else 1.0
    out = one
    for v in path.vertices:
        if v in skip:
            continue
        out = out / (m2 + path.graph.valence(v))
    return out


def w_prime_weight(
    path: Path, m2: Fraction | float, skip: frozenset[str] = frozenset()
) -> Fraction | float:
    """Closed-path weight with the duplicated endpoint factor dropped."""
    if not path.is_closed():
        raise GraphQFTError("w' is defined for closed paths")
    base = w_weight(path, m2, skip)
    v0 = path.vertices[0]
    if v0 in skip:
        return base
    return base * (m2 + path.graph.valence(v0))


# ---------------------------------------------------------------------------
# Exact integer transfer matrices
# ---------------------------------------------------------------------------

def _int_matmul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    n, m, kk = len(a), len(b[0]), len(b)
    bt = [[b[k][j] for k in range(kk)] for j in range(m)]
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def _int_identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _int_power(m: list[list[int]], k: int) -> list[list[int]]:
    out = _int_identity(len(m))
    for _ in range(k):
        out = _int_matmul(out, m)
    return out


def path_count_matrix(g: Graph, k: int) -> list[list[int]]:
    """Number of length-k paths between each vertex pair: the k-th adjacency
    power, in arbitrary-precision integer arithmetic."""
    return _int_power(g.adjacency().tolist(), k)


def hpath_count_matrix(g: Graph, k: int) -> list[list[int]]:
    """Plain h-path counts of length k: powers of adjacency + diag(valence)."""
    a = g.adjacency().tolist()
    val = [g.valence(v) for v in g.vertices]
    t = [[a[i][j] + (val[i] if i == j else 0) for j in range(g.n)] for i in range(g.n)]
    return _int_power(t, k)


def laplacian_power(g: Graph, k: int) -> list[list[int]]:
    """Exact k-th Laplacian power; entry (u,v) is the h-path count of length
    k signed by (-1)^degree."""
    a = g.adjacency().tolist()
    val = [g.valence(v) for v in g.vertices]
    d = [[(val[i] if i == j else 0) - a[i][j] for j in range(g.n)] for i in range(g.n)]
    return _int_power(d, k)
