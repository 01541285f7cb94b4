"""Parallel flip distance: lower bound, greedy upper bound, exact search, replay.

The greedy walk rests on a fact about crossings. If T != T2, some flippable
edge of T has a flip whose new diagonal crosses fewer edges of T2 than the
old edge. So a walk that only makes crossing-reducing flips reaches T2 in at
most crossing_number(T, T2) parallel steps. An edge whose flip lands on a
diagonal of T2 is the best case (it drops to zero crossings) and goes first.
"""
from __future__ import annotations

import random

import numpy as np
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import _walk
from .triangulation import (
    Edge,
    Mesh,
    PointSetMismatch,
    Triangulation,
    edge,
    greedy_independent,
)

DEFAULT_NODE_LIMIT = 10**7
DEFAULT_DEPTH_LIMIT = 64
STALL_FLIPS = 3
TABU_SIZE = 8


class BudgetExhausted(RuntimeError):
    def __init__(self, result: "DistanceResult", reason: str = "budget exhausted"):
        self.result = result
        super().__init__(f"{reason}: best bounds [{result.lower}, {result.upper}]")


class InvalidStep(ValueError):
    def __init__(self, index: int, detail: str):
        self.index = index
        super().__init__(f"step {index}: {detail}")


class NoProgress(RuntimeError):
    pass


@dataclass(frozen=True)
class FlipSequence:
    """Parallel flip steps. Each step lists the edges flipped in the triangulation
    reached so far (not the diagonals they become)."""

    steps: tuple[tuple[Edge, ...], ...] = ()

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def to_lists(self) -> list[list[list[int]]]:
        return [[list(e) for e in step] for step in self.steps]

    @classmethod
    def from_lists(cls, steps) -> "FlipSequence":
        return cls(tuple(tuple(sorted(edge(int(u), int(v)) for u, v in step)) for step in steps))


@dataclass(frozen=True)
class DistanceResult:
    lower: int
    upper: int
    witness: FlipSequence = field(default_factory=FlipSequence)
    exact: bool = False

    def __post_init__(self):
        assert 0 <= self.lower <= self.upper, (self.lower, self.upper)
        assert len(self.witness) == self.upper


def _check_pair(T1: Triangulation, T2: Triangulation):
    if T1.pointset != T2.pointset:
        raise PointSetMismatch("triangulations are on different point sets")


def lower_bound_from(d: int, n_triangles: int) -> int:
    if d == 0:
        return 0
    per_step = max(n_triangles // 2, 1)
    return max(-(-d // per_step), 1)


def distance_lower_bound(T1: Triangulation, T2: Triangulation) -> int:
    """ceil(d / floor(t/2)): one parallel flip uses two triangles per edge,
    so it replaces at most floor(t/2) of the d edges T1 has and T2 lacks."""
    _check_pair(T1, T2)
    d = len(T1.edge_set - T2.edge_set)
    return lower_bound_from(d, T1.pointset.num_triangles)


def replay(source: Triangulation, seq: Iterable[Sequence[Edge]]) -> Triangulation:
    mesh = source.mesh.copy()
    for i, step in enumerate(seq):
        used = set()
        step = [edge(*e) for e in step]
        for e in step:
            if e not in mesh.apex:
                raise InvalidStep(i, f"edge {e} is not in the current triangulation")
            if not mesh.is_flippable(e):
                raise InvalidStep(i, f"edge {e} is not flippable")
            for t in mesh.triangles_of(e):
                if t in used:
                    raise InvalidStep(i, f"edge {e} shares triangle {t} with another edge of the step")
                used.add(t)
        for e in step:
            mesh.flip(e)
    return Triangulation(source.pointset, mesh.apex.keys(), _mesh=mesh)


# -- greedy walk --------------------------------------------------------------

class CrossingOracle:
    """Memoised crossing counts of arbitrary segments against one fixed triangulation."""

    def __init__(self, target: Triangulation | Mesh):
        self.triangulation = target if isinstance(target, Triangulation) else None
        self.mesh = target.mesh if isinstance(target, Triangulation) else target
        self.edges = set(self.mesh.apex)
        self.cache: dict[Edge, int] = {}
        ps = self.mesh.ps
        self._packed = None
        # shared with the compiled walk, keyed by u * n + v
        self.compiled_cache = None
        if ps.arrays is not None:
            self._xs, self._ys = ps.arrays
            if self.triangulation is not None:
                self._packed = self.triangulation.packed
                self.compiled_cache = _walk.new_cache()
            else:
                self._packed = _walk.pack(ps.n, self.mesh.ccw_triangles())

    def _count(self, p: int, q: int) -> int:
        if self._packed is None:
            return self.mesh.crossings(p, q)
        c = _walk.crossings(self._xs, self._ys, *self._packed, p, q)
        if c < 0:
            raise ValueError(f"segment {p}-{q} passes through a point")
        return int(c)

    def __call__(self, e: Edge) -> int:
        c = self.cache.get(e)
        if c is None:
            c = 0 if e in self.edges else self._count(e[0], e[1])
            self.cache[e] = c
        return c


def greedy_walk(
    start: Mesh,
    target: CrossingOracle,
    rng: random.Random,
    by_gain: bool = True,
    freeze_happy: bool = True,
    max_steps: int | None = None,
) -> list[tuple[Edge, ...]]:
    """Parallel walk from ``start`` (mutated in place) to the oracle's triangulation.

    Each round takes a maximal independent set in priority order:
    (a) edges whose flip lands on a target diagonal, then (b) edges whose flip
    lowers their crossing count with the target, larger drops first when
    ``by_gain`` is set. Ties are broken by ``rng``. Edges shared with the
    target are never flipped, which may cost steps on some inputs.
    """
    mesh = start
    tedges = target.edges
    apex = mesh.apex
    bad = {e for e in apex if e not in tedges}
    # eligible crossing-reducing moves, kept up to date incrementally: a flip
    # only changes the triangles of its own quad
    rating: dict[Edge, tuple[int, int]] = {}

    def rate(e):
        a, b = apex[e]
        if a != -1 and b != -1 and mesh.is_flippable(e):
            f = (a, b) if a < b else (b, a)
            gain = target(e) - target(f)
            if gain > 0:
                rating[e] = (0 if f in tedges else 1, -gain if by_gain else 0)
                return
        rating.pop(e, None)

    for e in bad:
        rate(e)
    steps: list[tuple[Edge, ...]] = []
    tabu: list[int] = []
    stall = 0
    while bad:
        if max_steps is not None and len(steps) >= max_steps:
            break
        if rating:
            stall = 0
            rnd = rng.random
            ranked = sorted((cat, g, rnd(), e) for e, (cat, g) in rating.items())
            chosen = greedy_independent(mesh, (r[3] for r in ranked))
        else:
            # a crossing-reducing flip always exists, so reaching here means a bug
            # elsewhere; try a few crossing-neutral flips before giving up
            stall += 1
            if stall > STALL_FLIPS:
                raise NoProgress(f"greedy walk stalled with {len(bad)} edges left")
            neutral = [e for e in sorted(bad) if mesh.is_flippable(e) and target(e) == target(mesh.opposite(e))]
            rng.shuffle(neutral)
            chosen = []
            for e in neutral:
                trial = hash(frozenset(apex) - {e} | {mesh.opposite(e)})
                if trial not in tabu:
                    chosen = [e]
                    break
            if not chosen:
                raise NoProgress(f"greedy walk stalled with {len(bad)} edges left")
            tabu.append(hash(frozenset(apex)))
            del tabu[:-TABU_SIZE]
        touched = set()
        for e in chosen:
            u, v = e
            a, b = apex[e]
            f = mesh.flip(e)
            bad.discard(e)
            rating.pop(e, None)
            if f not in tedges:
                bad.add(f)
            touched.update((f, edge(u, b), edge(b, v), edge(v, a), edge(a, u)))
        for t in touched:
            if t in bad:
                rate(t)
        steps.append(tuple(sorted(chosen)))
    return steps


def sequential_walk_length(T1: Triangulation, T2: Triangulation) -> int:
    """Single-flip greedy walk length: a sequential distance upper bound that
    the parallel heuristic must not exceed."""
    _check_pair(T1, T2)
    mesh = T1.mesh.copy()
    oracle = CrossingOracle(T2)
    bad = {e for e in mesh.apex if e not in oracle.edges}
    flips = 0
    while bad:
        best = None
        for e in sorted(bad):
            if mesh.is_flippable(e):
                gain = oracle(e) - oracle(mesh.opposite(e))
                if gain > 0 and (best is None or gain > best[0]):
                    best = (gain, e)
        if best is None:
            raise NoProgress("sequential walk stalled")
        e = best[1]
        f = mesh.flip(e)
        bad.discard(e)
        if f not in oracle.edges:
            bad.add(f)
        flips += 1
    return flips


def default_restarts(n: int) -> int:
    return 8 if n <= 1000 else 2


_MASK = (1 << 64) - 1


def _restart_seed(seed: int, k: int) -> int:
    # splitmix64 finaliser over (seed, k), truncated to 31 bits
    z = (seed * 0x9E3779B97F4A7C15 + (k + 1) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & 0x7FFFFFFF


def _compiled_walks(T1: Triangulation, oracle: CrossingOracle, seed: int, restarts: int, lower: int):
    """Best compiled walk over all restarts, or None when it cannot run or a
    restart stalls (the Python walk has the stall fallback)."""
    if oracle.compiled_cache is None:
        return None
    xs, ys = T1.pointset.arrays
    tri, nbr, _ = T1.packed
    ttri, tnbr, tvt = oracle.triangulation.packed
    seeds = np.array([_restart_seed(seed, k) for k in range(restarts)], dtype=np.int64)
    status, offsets, us, vs = _walk.best_walk(
        xs, ys, tri, nbr, ttri, tnbr, tvt, oracle.triangulation.codes,
        oracle.compiled_cache, seeds, lower,
    )
    if status < 0:
        return None
    us = us.tolist()
    vs = vs.tolist()
    offsets = offsets.tolist()
    return [tuple(sorted(zip(us[a:b], vs[a:b]))) for a, b in zip(offsets, offsets[1:])]


def heuristic_distance(
    T1: Triangulation,
    T2: Triangulation,
    seed: int = 0,
    restarts: int | None = None,
    oracle: CrossingOracle | None = None,
) -> DistanceResult:
    """Best of ``restarts`` seeded greedy walks. Restart k draws its tie-breaks
    from a seed derived from ``(seed, k)``; even restarts rank (b) moves by
    crossing drop, odd ones purely at random. Ties across restarts go to the
    lowest k. The compiled walk is used whenever coordinates allow it; the
    Python walk (which seeds ``random.Random(f"{seed}:{k}")``) otherwise."""
    _check_pair(T1, T2)
    lower = distance_lower_bound(T1, T2)
    if T1.edge_set == T2.edge_set:
        return DistanceResult(0, 0, FlipSequence(), True)
    if restarts is None:
        restarts = default_restarts(T1.n)
    if oracle is None or oracle.triangulation is not T2:
        oracle = CrossingOracle(T2)
    restarts = max(restarts, 1)
    best = _compiled_walks(T1, oracle, seed, restarts, lower)
    if best is None:
        for k in range(restarts):
            cap = len(best) - 1 if best is not None else None
            rng = random.Random(f"{seed}:{k}")
            steps = greedy_walk(T1.mesh.copy(), oracle, rng, by_gain=k % 2 == 0, max_steps=cap)
            if best is None or (len(steps) < len(best) and _reaches(T1, steps, oracle.edges)):
                best = steps
            if len(best) == lower:
                break
    return DistanceResult(lower, len(best), FlipSequence(tuple(best)), lower == len(best))


def _reaches(T1, steps, tedges) -> bool:
    # a capped walk may stop early; only complete walks count
    m = T1.mesh.copy()
    for step in steps:
        for e in step:
            m.flip(e)
    return set(m.apex) == tedges


# -- exact search ---------------------------------------------------------------

class _Exhausted(Exception):
    pass


def exact_distance(
    T1: Triangulation,
    T2: Triangulation,
    node_limit: int = DEFAULT_NODE_LIMIT,
    depth_limit: int = DEFAULT_DEPTH_LIMIT,
    seed: int = 0,
) -> DistanceResult:
    """Iterative-deepening DFS over parallel flip steps with the lower bound as
    admissible heuristic.

    Successors are all nonempty independent subsets of flippable edges,
    happy edges included. They are built by include/exclude branching over
    the flippable list, with triangle-disjointness pruning. A transposition
    table, keyed by a 128-bit Zobrist hash of the edge set, keeps the best
    proven lower bound on each state's remaining distance across iterations.
    The last step is not enumerated: one step finishes iff the edges missing
    from the target are exactly an independent set whose flips all land in it.
    """
    _check_pair(T1, T2)
    if T1.edge_set == T2.edge_set:
        return DistanceResult(0, 0, FlipSequence(), True)
    ps = T1.pointset
    cap = max(ps.num_triangles // 2, 1)
    heur = heuristic_distance(T1, T2, seed=seed)
    lower = heur.lower
    if heur.exact:
        return heur

    zrng = random.Random(f"zobrist:{seed}")
    zob: dict[Edge, int] = {}

    def z(e):
        k = zob.get(e)
        if k is None:
            k = zob[e] = zrng.getrandbits(128)
        return k

    mesh = T1.mesh.copy()
    tedges = set(T2.edge_set)
    bad = {e for e in mesh.apex if e not in tedges}
    state = {"h": 0}
    for e in mesh.apex:
        state["h"] ^= z(e)
    table: dict[int, int] = {}
    path: list[tuple[Edge, ...]] = []
    nodes = 0

    def do_flip(e):
        f = mesh.flip(e)
        state["h"] ^= z(e) ^ z(f)
        bad.discard(e)
        if f not in tedges:
            bad.add(f)
        return f

    def one_step():
        used = set()
        apex = mesh.apex
        for e in bad:
            a, b = apex[e]
            if a == -1 or b == -1 or edge(a, b) not in tedges or not mesh.is_flippable(e):
                return None
            for t in mesh.triangles_of(e):
                if t in used:
                    return None
                used.add(t)
        return tuple(sorted(bad))

    def search(r: int) -> bool:
        nonlocal nodes
        if not bad:
            return True
        # every generated successor counts, pruned or not: the subsets
        # enumerated under one node can be exponentially many
        nodes += 1
        if nodes > node_limit:
            raise _Exhausted
        if r <= 0 or lower_bound_from(len(bad), ps.num_triangles) > r:
            return False
        h = state["h"]
        if table.get(h, 0) > r:
            return False
        if r == 1:
            step = one_step()
            if step is not None:
                path.append(step)
                return True
            table[h] = max(table.get(h, 0), 2)
            return False
        flippable = mesh.flippable()
        tris = [mesh.triangles_of(e) for e in flippable]
        used: set = set()
        chosen: list[Edge] = []

        def extend(i: int) -> bool:
            for j in range(i, len(flippable)):
                t1, t2 = tris[j]
                if t1 in used or t2 in used:
                    continue
                e = flippable[j]
                f = do_flip(e)
                used.add(t1)
                used.add(t2)
                chosen.append(e)
                path.append(tuple(sorted(chosen)))
                if search(r - 1):
                    return True
                path.pop()
                if len(chosen) < cap and extend(j + 1):
                    return True
                chosen.pop()
                used.discard(t1)
                used.discard(t2)
                do_flip(f)
            return False

        if extend(0):
            return True
        table[h] = max(table.get(h, 0), r + 1)
        return False

    best_lower = lower
    try:
        for bound in range(lower, heur.upper):
            if bound > depth_limit:
                raise _Exhausted
            if search(bound):
                seq = FlipSequence(tuple(path))
                return DistanceResult(bound, bound, seq, True)
            best_lower = bound + 1
    except _Exhausted:
        raise BudgetExhausted(
            DistanceResult(best_lower, heur.upper, heur.witness, best_lower == heur.upper),
            f"exact search stopped after {nodes} nodes",
        ) from None
    return DistanceResult(heur.upper, heur.upper, heur.witness, True)
