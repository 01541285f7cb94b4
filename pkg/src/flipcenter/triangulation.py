"""Triangulations of a fixed point set and the flip / parallel-flip calculus.

Two representations:

* :class:`Triangulation` is the immutable value type used at API
  boundaries. Its edges are canonical ``(u, v)`` tuples with ``u < v``, kept
  sorted.
* :class:`Mesh` is the mutable working form. It maps every edge to the apex
  of the triangle on its left and on its right (``-1`` outside the hull) and
  flips in place. Search code uses it to avoid copying.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _planar, _walk
from .geometry import (
    INT64_MAX,
    INT64_MIN,
    DegenerateInput,
    DuplicatePoint,
    Point,
    hull_boundary,
    segments_cross,
)

Edge = tuple[int, int]


class NotATriangulation(ValueError):
    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NotFlippable(ValueError):
    pass


class NotIndependent(ValueError):
    pass


class UnknownEdge(KeyError):
    pass


class PointSetMismatch(ValueError):
    pass


def edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class PointSet:
    """Immutable point set with its hull data precomputed."""

    __slots__ = ("points", "xs", "ys", "n", "boundary", "h", "hull_edges", "_hash", "arrays")

    def __init__(self, points: Iterable):
        pts = tuple(Point(int(p[0]), int(p[1])) for p in points)
        for i, p in enumerate(pts):
            if not (INT64_MIN <= p.x <= INT64_MAX and INT64_MIN <= p.y <= INT64_MAX):
                raise ValueError(f"point {i} does not fit in 64-bit coordinates")
        self.points = pts
        self.xs = [p.x for p in pts]
        self.ys = [p.y for p in pts]
        self.n = len(pts)
        # raises DuplicatePoint / DegenerateInput
        self.boundary = tuple(hull_boundary(pts))
        self.h = len(self.boundary)
        b = self.boundary
        self.hull_edges = frozenset(edge(b[i], b[(i + 1) % self.h]) for i in range(self.h))
        self._hash = hash(pts)
        # int64 copies for the compiled kernels, or None when coordinates are
        # too large for their overflow-free range
        self.arrays = None
        if all(abs(c) < _planar.SAFE_COORD for c in self.xs + self.ys):
            self.arrays = (np.array(self.xs, dtype=np.int64), np.array(self.ys, dtype=np.int64))

    @property
    def num_edges(self) -> int:
        return 3 * self.n - self.h - 3

    @property
    def num_triangles(self) -> int:
        return 2 * self.n - self.h - 2

    def __len__(self):
        return self.n

    def __eq__(self, other):
        return self is other or (isinstance(other, PointSet) and self.points == other.points)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"PointSet(n={self.n}, h={self.h})"


def as_pointset(points) -> PointSet:
    return points if isinstance(points, PointSet) else PointSet(points)


class Mesh:
    """Mutable triangulation: adjacency sets plus per-edge (left, right) apexes."""

    __slots__ = ("ps", "xs", "ys", "adj", "apex")

    def __init__(self, ps: PointSet, adj: list[set[int]], apex: dict[Edge, tuple[int, int]]):
        self.ps = ps
        self.xs = ps.xs
        self.ys = ps.ys
        self.adj = adj
        self.apex = apex

    @classmethod
    def from_edges(cls, ps: PointSet, edges: Iterable[Edge]) -> "Mesh":
        """Build from an edge set already known to be a triangulation."""
        adj: list[set[int]] = [set() for _ in range(ps.n)]
        edges = list(edges)
        for u, v in edges:
            adj[u].add(v)
            adj[v].add(u)
        xs, ys = ps.xs, ps.ys
        apex: dict[Edge, tuple[int, int]] = {}
        for u, v in edges:
            left = right = -1
            xu, yu, xv, yv = xs[u], ys[u], xs[v], ys[v]
            dx, dy = xv - xu, yv - yu
            for w in adj[u] & adj[v]:
                s = dx * (ys[w] - yu) - dy * (xs[w] - xu)
                # the face apex is the innermost common neighbour on each side
                if s > 0:
                    if left == -1 or _inside(xs, ys, u, v, left, w):
                        left = w
                elif s < 0:
                    if right == -1 or _inside(xs, ys, u, v, right, w):
                        right = w
            apex[(u, v)] = (left, right)
        return cls(ps, adj, apex)

    def copy(self) -> "Mesh":
        return Mesh(self.ps, [set(s) for s in self.adj], dict(self.apex))

    # -- queries -------------------------------------------------------------
    def orient(self, i: int, j: int, k: int) -> int:
        xs, ys = self.xs, self.ys
        c = (xs[j] - xs[i]) * (ys[k] - ys[i]) - (ys[j] - ys[i]) * (xs[k] - xs[i])
        return (c > 0) - (c < 0)

    def __contains__(self, e) -> bool:
        return e in self.apex

    def edges(self) -> list[Edge]:
        return sorted(self.apex)

    def triangles_of(self, e: Edge) -> list[tuple[int, int, int]]:
        u, v = e
        return [tuple(sorted((u, v, w))) for w in self.apex[e] if w != -1]

    def triangles(self) -> list[tuple[int, int, int]]:
        tris = set()
        for (u, v), (a, b) in self.apex.items():
            if a != -1:
                tris.add(tuple(sorted((u, v, a))))
            if b != -1:
                tris.add(tuple(sorted((u, v, b))))
        return sorted(tris)

    def ccw_triangles(self) -> list[tuple[int, int, int]]:
        seen = set()
        out = []
        for (u, v), (a, b) in self.apex.items():
            for tri in ((u, v, a), (v, u, b)):
                if tri[2] != -1:
                    key = tuple(sorted(tri))
                    if key not in seen:
                        seen.add(key)
                        out.append(tri)
        return out

    def is_flippable(self, e: Edge) -> bool:
        a, b = self.apex[e]
        if a == -1 or b == -1:
            return False
        u, v = e
        # quad in ccw order: u, b, v, a; the two turns at u and v are given
        return self.orient(b, v, a) > 0 and self.orient(a, u, b) > 0

    def opposite(self, e: Edge) -> Edge:
        a, b = self.apex[e]
        return edge(a, b)

    def flippable(self) -> list[Edge]:
        return [e for e in sorted(self.apex) if self.is_flippable(e)]

    def left_apex(self, u: int, v: int) -> int:
        """Apex of the triangle to the left of the directed edge u -> v."""
        if u < v:
            return self.apex[(u, v)][0]
        return self.apex[(v, u)][1]

    # -- updates ------------------------------------------------------------
    def flip(self, e: Edge) -> Edge:
        """Flip ``e`` in place (flippability is not rechecked); returns the new edge."""
        u, v = e
        a, b = self.apex.pop(e)
        apex = self.apex
        _swap_apex(apex, u, b, v, a)
        _swap_apex(apex, b, v, u, a)
        _swap_apex(apex, v, a, u, b)
        _swap_apex(apex, a, u, v, b)
        self.adj[u].discard(v)
        self.adj[v].discard(u)
        self.adj[a].add(b)
        self.adj[b].add(a)
        f = edge(a, b)
        # u is right of a -> b
        if self.orient(a, b, u) > 0:
            apex[f] = (u, v) if a < b else (v, u)
        else:
            apex[f] = (v, u) if a < b else (u, v)
        return f

    def crossings(self, p: int, q: int) -> int:
        """Number of mesh edges properly crossed by the segment pq.

        pq must not pass through any point. That always holds when pq is an
        edge of some triangulation of the same point set.
        """
        if edge(p, q) in self.apex:
            return 0
        xs, ys = self.xs, self.ys
        apex = self.apex
        xp, yp, xq, yq = xs[p], ys[p], xs[q], ys[q]
        dx, dy = xq - xp, yq - yp
        a = b = -1
        for a in self.adj[p]:
            b = apex[(p, a)][0] if p < a else apex[(a, p)][1]
            if b == -1:
                continue
            # q strictly inside the wedge a-p-b (ccw)
            if (xs[a] - xp) * (yq - yp) - (ys[a] - yp) * (xq - xp) > 0 and (
                dx * (ys[b] - yp) - dy * (xs[b] - xp) > 0
            ):
                break
        else:
            raise ValueError(f"segment {p}-{q} leaves the hull or passes through a point")
        # now crossing edge (a, b) with a right of pq and b left of it
        count = 1
        prev = p
        while True:
            l, r = apex[(a, b)] if a < b else apex[(b, a)]
            c = l if r == prev else r
            if c == q:
                return count
            s = dx * (ys[c] - yp) - dy * (xs[c] - xp)
            if s > 0:
                prev, b = b, c
            elif s < 0:
                prev, a = a, c
            else:
                raise ValueError(f"segment {p}-{q} passes through point {c}")
            count += 1


def _inside(xs, ys, u, v, w, p) -> bool:
    """p strictly inside triangle (u, v, w); p assumed on w's side of uv."""
    def o(i, j, k):
        return (xs[j] - xs[i]) * (ys[k] - ys[i]) - (ys[j] - ys[i]) * (xs[k] - xs[i])

    s = o(u, v, w)
    if s > 0:
        return o(v, w, p) > 0 and o(w, u, p) > 0
    return o(v, w, p) < 0 and o(w, u, p) < 0


def _swap_apex(apex, x, y, old, new):
    k = (x, y) if x < y else (y, x)
    l, r = apex[k]
    apex[k] = (new, r) if l == old else (l, new)


@dataclass(frozen=True)
class FlippableEdge:
    edge: Edge
    opposite: Edge
    quad: tuple[int, int, int, int]  # ccw boundary order starting at edge[0]

    @property
    def triangles(self) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
        u, b, v, a = self.quad
        return tuple(sorted((u, v, a))), tuple(sorted((u, v, b)))


@dataclass(frozen=True)
class ParallelFlipSet:
    flips: tuple[FlippableEdge, ...]

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(f.edge for f in self.flips)

    def __len__(self):
        return len(self.flips)

    def __iter__(self):
        return iter(self.flips)


class Triangulation:
    """Validated, immutable triangulation of a :class:`PointSet`."""

    __slots__ = ("pointset", "edges", "edge_set", "_mesh", "_packed", "_codes")

    def __init__(self, pointset: PointSet, edges: Iterable[Edge], *, _mesh: Mesh | None = None):
        # use build() for untrusted input; this constructor does not validate
        self.pointset = pointset
        self.edges = tuple(sorted(edges))
        self.edge_set = frozenset(self.edges)
        self._mesh = _mesh
        self._packed = None
        self._codes = None

    @property
    def n(self) -> int:
        return self.pointset.n

    @property
    def mesh(self) -> Mesh:
        """Shared read-only mesh; call ``.copy()`` before mutating."""
        if self._mesh is None:
            self._mesh = Mesh.from_edges(self.pointset, self.edges)
        return self._mesh

    @property
    def triangles(self) -> list[tuple[int, int, int]]:
        return self.mesh.triangles()

    @property
    def packed(self):
        """(tri, nbr, vt) triangle arrays for the compiled kernels."""
        if self._packed is None:
            self._packed = _walk.pack(self.n, self.mesh.ccw_triangles())
        return self._packed

    @property
    def codes(self) -> np.ndarray:
        """Sorted int64 edge codes ``u * n + v``."""
        if self._codes is None:
            e = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
            self._codes = np.sort(e[:, 0] * self.n + e[:, 1])
        return self._codes

    @property
    def edge_to_triangles(self) -> dict[Edge, list[tuple[int, int, int]]]:
        m = self.mesh
        return {e: m.triangles_of(e) for e in self.edges}

    def __contains__(self, e) -> bool:
        return edge(*e) in self.edge_set

    def __len__(self):
        return len(self.edges)

    def __eq__(self, other):
        return (
            isinstance(other, Triangulation)
            and self.edge_set == other.edge_set
            and self.pointset == other.pointset
        )

    def __hash__(self):
        return hash(self.edge_set)

    def __repr__(self):
        return f"Triangulation(n={self.n}, edges={len(self.edges)})"

    @classmethod
    def from_mesh(cls, mesh: Mesh) -> "Triangulation":
        m = mesh.copy()
        return cls(mesh.ps, m.apex.keys(), _mesh=m)


# -- construction ------------------------------------------------------------

def triangulation_problems(ps: PointSet, edges: Iterable) -> list[str]:
    """Every violated triangulation invariant, as readable messages (empty if valid)."""
    problems: list[str] = []
    canon: list[Edge] = []
    seen: set[Edge] = set()
    for raw in edges:
        u, v = int(raw[0]), int(raw[1])
        if not (0 <= u < ps.n and 0 <= v < ps.n):
            problems.append(f"edge ({u}, {v}) has a point index out of range 0..{ps.n - 1}")
            continue
        if u == v:
            problems.append(f"self-loop at point {u}")
            continue
        e = edge(u, v)
        if e in seen:
            problems.append(f"duplicate edge {e}")
            continue
        seen.add(e)
        canon.append(e)
    if len(canon) != ps.num_edges:
        problems.append(
            f"wrong edge count (3n−h−3): expected {ps.num_edges} for n={ps.n}, h={ps.h}, got {len(canon)}"
        )
    missing = sorted(ps.hull_edges - seen)
    if missing:
        problems.append("missing hull edge(s): " + ", ".join(map(str, missing[:20])))
    if canon:
        codes = _planar.pair_codes([e[0] for e in canon], [e[1] for e in canon], ps.n)
        bad = _planar.first_conflict(ps.xs, ps.ys, codes)
        if bad is not None:
            i, j = bad
            if j >= 0:
                problems.append(f"edges {canon[j]} and {canon[i]} intersect")
            else:
                problems.append(f"edge {canon[i]} passes through point {-1 - j}")
    if not problems:
        # planar with the maximum edge count, so maximal; cross-check faces
        mesh = Mesh.from_edges(ps, canon)
        ntri = len(mesh.triangles())
        if ntri != ps.num_triangles:
            problems.append(f"wrong triangle count (2n−h−2): expected {ps.num_triangles}, got {ntri}")
        for e, (a, b) in mesh.apex.items():
            want = 1 if e in ps.hull_edges else 2
            if (a != -1) + (b != -1) != want:
                problems.append(f"edge {e} borders {(a != -1) + (b != -1)} triangles, expected {want}")
                break
    return problems


def build(points, edges: Iterable) -> Triangulation:
    """Validate ``edges`` as a triangulation of ``points``.

    Raises NotATriangulation listing every violated invariant,
    DuplicatePoint, or DegenerateInput.
    """
    ps = as_pointset(points)
    edges = list(edges)
    problems = triangulation_problems(ps, edges)
    if problems:
        raise NotATriangulation(problems)
    return Triangulation(ps, (edge(int(u), int(v)) for u, v in edges))


def greedy_insertion(ps: PointSet, codes: np.ndarray) -> list[Edge]:
    """Keep each candidate (as a pair code, in order) compatible with those kept so far."""
    keep = _planar.greedy_insert(ps.xs, ps.ys, codes, ps.num_edges)
    us, vs = _planar.decode_pairs(np.asarray(codes, dtype=np.int64)[keep], ps.n)
    return [(int(u), int(v)) for u, v in zip(us, vs)]


def greedy_random_triangulation(points, seed: int) -> Triangulation:
    """Greedy insertion over a uniformly random order of all C(n, 2) point pairs.

    The order is ``numpy.random.default_rng(seed).permutation`` over pair
    codes (row-major over i < j), so a seed pins the result on every platform.
    """
    ps = as_pointset(points)
    if ps.n < 3:
        raise DegenerateInput("need at least 3 points")
    rng = np.random.default_rng(seed)
    codes = rng.permutation(ps.n * (ps.n - 1) // 2)
    edges = greedy_insertion(ps, codes)
    if len(edges) != ps.num_edges:  # pragma: no cover - would be a kernel bug
        raise NotATriangulation([f"greedy insertion stopped at {len(edges)} edges"])
    return Triangulation(ps, edges)


def complete(ps: PointSet, prefix: Sequence[Edge], seed: int) -> Triangulation:
    """Greedy insertion of ``prefix`` in order, then random completion."""
    codes = _planar.pair_codes([e[0] for e in prefix], [e[1] for e in prefix], ps.n) if prefix else np.empty(0, np.int64)
    edges = greedy_insertion(ps, codes)
    if len(edges) < ps.num_edges:
        rest = np.random.default_rng(seed).permutation(ps.n * (ps.n - 1) // 2)
        codes = np.concatenate([_planar.pair_codes([e[0] for e in edges], [e[1] for e in edges], ps.n), rest])
        edges = greedy_insertion(ps, codes)
    return Triangulation(ps, edges)


# -- flips ---------------------------------------------------------------------

def _flippable_record(mesh: Mesh, e: Edge) -> FlippableEdge:
    a, b = mesh.apex[e]
    u, v = e
    return FlippableEdge(e, edge(a, b), (u, b, v, a))


def flippable_edges(T: Triangulation) -> list[FlippableEdge]:
    m = T.mesh
    return [_flippable_record(m, e) for e in m.flippable()]


def flip(T: Triangulation, e) -> Triangulation:
    e = edge(*e)
    m = T.mesh
    if e not in m.apex:
        raise UnknownEdge(e)
    if not m.is_flippable(e):
        raise NotFlippable(f"{e} is not the diagonal of a strictly convex quadrilateral")
    m = m.copy()
    m.flip(e)
    return Triangulation(T.pointset, m.apex.keys(), _mesh=m)


def _as_edges(D) -> list[Edge]:
    if isinstance(D, ParallelFlipSet):
        return list(D.edges)
    out = []
    for x in D:
        out.append(x.edge if isinstance(x, FlippableEdge) else edge(*x))
    return out


def is_independent(T: Triangulation, D) -> bool:
    m = T.mesh
    used: set = set()
    for e in _as_edges(D):
        if e not in m.apex:
            raise UnknownEdge(e)
        if not m.is_flippable(e):
            return False
        for t in m.triangles_of(e):
            if t in used:
                return False
            used.add(t)
    return True


def apply_parallel_flip(T: Triangulation, D) -> Triangulation:
    edges = _as_edges(D)
    if not is_independent(T, edges):
        raise NotIndependent(f"{sorted(edges)} is not an independent set of flippable edges")
    if not edges:
        return T
    m = T.mesh.copy()
    for e in edges:
        m.flip(e)
    return Triangulation(T.pointset, m.apex.keys(), _mesh=m)


def greedy_independent(mesh: Mesh, order: Iterable[Edge]) -> list[Edge]:
    """Take flippable edges in ``order`` while they share no triangle with those taken."""
    used: set = set()
    out = []
    apex = mesh.apex
    for e in order:
        if not mesh.is_flippable(e):
            continue
        u, v = e
        a, b = apex[e]
        t1 = (u, v, a)
        t2 = (u, v, b)
        t1 = tuple(sorted(t1))
        t2 = tuple(sorted(t2))
        if t1 in used or t2 in used:
            continue
        used.add(t1)
        used.add(t2)
        out.append(e)
    return out


def random_independent(mesh: Mesh, rng: np.random.Generator) -> list[Edge]:
    """Greedy independent set over a random permutation of the (sorted) flippable edges."""
    cand = mesh.flippable()
    order = rng.permutation(len(cand))
    return greedy_independent(mesh, (cand[i] for i in order))


def maximal_independent_flippable_set(T: Triangulation, seed: int) -> ParallelFlipSet:
    """Seeded greedy over a random order of the flippable edges."""
    m = T.mesh
    chosen = random_independent(m, np.random.default_rng(seed))
    return ParallelFlipSet(tuple(_flippable_record(m, e) for e in sorted(chosen)))


def _same_points(T1: Triangulation, T2: Triangulation):
    if T1.pointset != T2.pointset:
        raise PointSetMismatch("triangulations are on different point sets")


def crossing_number(T1: Triangulation, T2: Triangulation) -> int:
    """Proper crossings between the edges of T1 and those of T2."""
    _same_points(T1, T2)
    m2 = T2.mesh
    return sum(m2.crossings(u, v) for u, v in T1.edges if (u, v) not in T2.edge_set)


def crossing_number_bruteforce(T1: Triangulation, T2: Triangulation) -> int:
    _same_points(T1, T2)
    P = T1.pointset.points
    return sum(
        segments_cross(P[a], P[b], P[c], P[d])
        for (a, b), (c, d) in itertools.product(T1.edges, T2.edges)
    )


def happy_edges(T1: Triangulation, T2: Triangulation) -> frozenset[Edge]:
    _same_points(T1, T2)
    return T1.edge_set & T2.edge_set


def euler_counts_ok(T: Triangulation) -> bool:
    ps = T.pointset
    return len(T.edges) == ps.num_edges and len(T.triangles) == ps.num_triangles


__all__ = [
    "DegenerateInput",
    "DuplicatePoint",
    "Edge",
    "FlippableEdge",
    "Mesh",
    "NotATriangulation",
    "NotFlippable",
    "NotIndependent",
    "ParallelFlipSet",
    "PointSet",
    "PointSetMismatch",
    "Triangulation",
    "UnknownEdge",
    "apply_parallel_flip",
    "as_pointset",
    "build",
    "complete",
    "crossing_number",
    "crossing_number_bruteforce",
    "edge",
    "flip",
    "flippable_edges",
    "greedy_independent",
    "greedy_random_triangulation",
    "happy_edges",
    "is_independent",
    "maximal_independent_flippable_set",
    "random_independent",
]
