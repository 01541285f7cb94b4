"""Center search: candidate centers, annealing over single flips, anytime driver.

The search energy of a center C is

    sum_i u_i(C) + w * sum_i d_i(C)

where u_i is the heuristic parallel distance to input i and d_i the number
of edges of C missing from input i. The second term is cheap and exact under
a flip (it moves by count(e) - count(f)), so it steers the walk across the
wide plateaus of the first. How often the u_i are recomputed is the refresh
policy:

* n <= exact_threshold: every u_i after every proposal (memoised per state),
  so every visited state has its true surrogate value.
* n <= incremental_max_n: only the inputs containing the flipped edge or the
  new diagonal, plus a full refresh every ``refresh_every`` accepted moves
  and whenever the running total looks like a new incumbent.
* larger n: none per proposal; full refreshes only.

The incumbent is always judged on fully refreshed values.
"""
from __future__ import annotations

import dataclasses
import enum
import heapq
import math
import random
import statistics
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .distance import (
    BudgetExhausted,
    CrossingOracle,
    DistanceResult,
    exact_distance,
    heuristic_distance,
)
from .instances import Instance, Solution
from .triangulation import Edge, Mesh, Triangulation, complete, edge


class Mode(str, enum.Enum):
    EXACT = "exact"
    SURROGATE = "surrogate"


class ExactModeUnavailable(RuntimeError):
    pass


@dataclass(frozen=True)
class ObjectiveValue:
    per_input: tuple[DistanceResult, ...]
    mode: Mode

    def __post_init__(self):
        if self.mode is Mode.EXACT:
            assert all(r.exact for r in self.per_input)

    @property
    def total_upper(self) -> int:
        return sum(r.upper for r in self.per_input)

    @property
    def total_lower(self) -> int:
        return sum(r.lower for r in self.per_input)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "total_upper": self.total_upper,
            "total_lower": self.total_lower,
            "per_input": [{"lower": r.lower, "upper": r.upper, "exact": r.exact} for r in self.per_input],
        }


@dataclass
class SolverConfig:
    seed: int = 0
    time_budget: float = 60.0  # seconds; a hard cap, see solve()
    restarts: int | None = None  # heuristic walks per distance; None = by n
    initial_temperature: float | None = None  # None = calibrate from 100 samples
    cooling: float = 0.995
    steps_per_temperature: int | None = None  # None = 4 x flippable edges of the start
    max_proposals: int | None = None  # per annealing chain; None = by mode
    refresh_every: int | None = None  # accepted moves between full refreshes; None = by mode
    exact_threshold: int = 12
    exact_node_limit: int = 10**6
    incremental_max_n: int = 400
    agreement_weight: float = 0.05
    top_k: int = 3
    screen: int = 4  # above incremental_max_n, candidates surrogate-evaluated after screening
    threads: int = 1

    def __post_init__(self):
        positive = ["time_budget", "exact_node_limit", "top_k", "threads", "screen"]
        optional = ["restarts", "initial_temperature", "steps_per_temperature", "max_proposals", "refresh_every"]
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in optional:
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.cooling < 1:
            raise ValueError("cooling must lie in (0, 1)")
        if self.exact_threshold < 0 or self.incremental_max_n < 0 or self.agreement_weight < 0:
            raise ValueError("thresholds and weights must be nonnegative")

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "SolverConfig":
        """Build from strings or numbers (config files, CLI overrides)."""
        kwargs = {}
        fields = {f.name: f for f in dataclasses.fields(cls)}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in fields:
                raise ValueError(f"unknown solver option {key!r}")
            default = fields[key].default
            if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("", "none", "auto")):
                kwargs[key] = None
            elif isinstance(default, float) or key in ("initial_temperature",):
                kwargs[key] = float(raw)
            else:
                kwargs[key] = int(raw)
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# -- evaluation -----------------------------------------------------------------

class Evaluator:
    """Distances from candidate centers to the inputs of one instance.

    Crossing oracles for the inputs are built once and shared across all
    candidates. For small n, results are memoised per (center, input)."""

    def __init__(self, instance: Instance, config: SolverConfig):
        self.instance = instance
        self.config = config
        self.inputs = instance.inputs
        self.m = len(self.inputs)
        self.oracles = [CrossingOracle(T) for T in self.inputs]
        self.count: Counter = Counter(e for T in self.inputs for e in T.edges)
        self.holders: dict[Edge, tuple[int, ...]] = {}
        for i, T in enumerate(self.inputs):
            for e in T.edges:
                self.holders[e] = self.holders.get(e, ()) + (i,)
        self.memoise = instance.n <= config.incremental_max_n
        self._memo: list[dict] = [{} for _ in range(self.m)]
        self._pool: ThreadPoolExecutor | None = None
        self.calls = 0

    def distance(self, C: Triangulation, i: int) -> DistanceResult:
        memo = self._memo[i]
        if self.memoise:
            hit = memo.get(C.edge_set)
            if hit is not None:
                return hit
        self.calls += 1
        r = heuristic_distance(C, self.inputs[i], seed=self.config.seed,
                               restarts=self.config.restarts, oracle=self.oracles[i])
        if self.memoise:
            if len(memo) > 200_000:
                memo.clear()
            memo[C.edge_set] = r
        return r

    def distances(self, C: Triangulation, which: Sequence[int] | None = None) -> list[DistanceResult]:
        which = range(self.m) if which is None else which
        if self.config.threads > 1 and len(which) > 1:
            if self._pool is None:
                self._pool = ThreadPoolExecutor(self.config.threads)
            # map keeps input order, so results never depend on scheduling
            return list(self._pool.map(lambda i: self.distance(C, i), which))
        return [self.distance(C, i) for i in which]

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def surrogate(self, C: Triangulation) -> ObjectiveValue:
        return ObjectiveValue(tuple(self.distances(C)), Mode.SURROGATE)

    def disagreement(self, edges) -> int:
        """sum_i |C - T_i|."""
        return sum(self.m - self.count.get(e, 0) for e in edges)


def _exact_objective(C: Triangulation, inputs: Sequence[Triangulation], config: SolverConfig) -> ObjectiveValue:
    if C.n > config.exact_threshold:
        raise ExactModeUnavailable(f"exact mode is limited to n <= {config.exact_threshold}")
    out = []
    for T in inputs:
        try:
            out.append(exact_distance(C, T, node_limit=config.exact_node_limit, seed=config.seed))
        except BudgetExhausted as e:
            raise ExactModeUnavailable(str(e)) from None
    return ObjectiveValue(tuple(out), Mode.EXACT)


def evaluate(C: Triangulation, instance: Instance, mode: Mode | str = Mode.SURROGATE,
             config: SolverConfig | None = None) -> ObjectiveValue:
    """Objective of center C: exact distances (small n only) or heuristic upper bounds."""
    config = config or SolverConfig()
    if C.pointset != instance.pointset:
        raise ValueError("center is not on the instance point set")
    if Mode(mode) is Mode.EXACT:
        return _exact_objective(C, instance.inputs, config)
    return ObjectiveValue(
        tuple(heuristic_distance(C, T, seed=config.seed, restarts=config.restarts) for T in instance.inputs),
        Mode.SURROGATE,
    )


# -- candidates ------------------------------------------------------------------

def majority_candidate(instance: Instance, seed: int) -> Triangulation:
    """Edges by descending number of inputs containing them (seeded shuffle
    within ties), kept greedily while compatible, then completed at random."""
    count = Counter(e for t in instance.triangulations for e in t)
    union = sorted(count)
    order = np.random.default_rng(seed).permutation(len(union))
    ranked = sorted((union[i] for i in order), key=lambda e: -count[e])
    return complete(instance.pointset, ranked, seed)


def initial_candidates(instance: Instance, seed: int = 0) -> list[Triangulation]:
    """Every distinct input, then the edge-majority triangulation (if new)."""
    out: list[Triangulation] = []
    seen = set()
    for T in list(instance.inputs) + [majority_candidate(instance, seed)]:
        if T.edge_set not in seen:
            seen.add(T.edge_set)
            out.append(T)
    return out


# -- annealing -------------------------------------------------------------------

@dataclass
class _Best:
    key: tuple
    edges: tuple[Edge, ...]
    value: ObjectiveValue


@dataclass
class SearchStats:
    proposals: int = 0
    accepted: int = 0
    refreshes: int = 0
    temperature: float = 0.0


def _policy(n: int, config: SolverConfig) -> str:
    if n <= config.exact_threshold:
        return "full"
    if n <= config.incremental_max_n:
        return "affected"
    return "none"


class _Chain:
    """One annealing chain; the mesh is the current state."""

    def __init__(self, ev: Evaluator, start: Triangulation, config: SolverConfig, rng: random.Random):
        self.ev = ev
        self.config = config
        self.rng = rng
        self.ps = start.pointset
        self.mesh: Mesh = start.mesh.copy()
        self.policy = _policy(start.n, config)
        self.hull = self.ps.hull_edges
        self.interior = sorted(e for e in self.mesh.apex if e not in self.hull)
        self.pos = {e: k for k, e in enumerate(self.interior)}
        self.w = config.agreement_weight
        self.u: list[int] = []
        self.results: list[DistanceResult] = []
        self.dis = ev.disagreement(self.mesh.apex)

    def current(self) -> Triangulation:
        return Triangulation(self.ps, self.mesh.apex.keys(), _mesh=self.mesh.copy())

    def refresh(self) -> ObjectiveValue:
        value = self.ev.surrogate(self.current())
        self.results = list(value.per_input)
        self.u = [r.upper for r in self.results]
        return value

    def propose(self) -> Edge:
        mesh = self.mesh
        while True:
            e = self.interior[self.rng.randrange(len(self.interior))]
            if mesh.is_flippable(e):
                return e

    def _apply(self, e: Edge) -> Edge:
        f = self.mesh.flip(e)
        k = self.pos.pop(e)
        self.interior[k] = f
        self.pos[f] = k
        return f

    def delta(self, e: Edge):
        """Energy change of flipping e, plus what is needed to commit it.
        The mesh is left unchanged."""
        ev = self.ev
        f = self.mesh.opposite(e)
        dd = ev.count.get(e, 0) - ev.count.get(f, 0)
        if self.policy == "none":
            return self.w * dd, dd, f, None
        if self.policy == "full":
            which = list(range(ev.m))
        else:
            which = sorted(set(ev.holders.get(e, ())) | set(ev.holders.get(f, ())))
        if not which:
            return self.w * dd, dd, f, ([], [])
        self._apply(e)
        new = ev.distances(self.current(), which)
        self._apply(f)
        du = sum(r.upper - self.u[i] for i, r in zip(which, new))
        return du + self.w * dd, dd, f, (which, new)

    def commit(self, e: Edge, dd: int, update) -> None:
        self._apply(e)
        self.dis += dd
        if update is not None:
            for i, r in zip(*update):
                self.u[i] = r.upper
                self.results[i] = r

    def total(self) -> int:
        return sum(self.u)


def _calibrate(chain: _Chain, samples: int = 100) -> float:
    deltas = []
    for _ in range(samples):
        d = chain.delta(chain.propose())[0]
        if d != 0:
            deltas.append(abs(d))
    if not deltas:
        return 1.0
    return statistics.median(deltas) / math.log(2)


def _default_proposals(policy: str, num_edges: int) -> int:
    if policy == "full":
        return 4000
    if policy == "affected":
        return max(2000, 4 * num_edges)
    # every full refresh costs m heuristic distances at large n, and single
    # flips rarely move them; keep the chain short
    return num_edges


def _default_refresh(policy: str, num_edges: int) -> int:
    return 50 if policy != "none" else max(50, num_edges // 3)


def local_search(
    instance: Instance,
    start: Triangulation,
    config: SolverConfig | None = None,
    *,
    evaluator: Evaluator | None = None,
    chain_id: int = 0,
    deadline: float | None = None,
    on_improve: Callable[[Triangulation, ObjectiveValue], None] | None = None,
    pool: dict | None = None,
) -> tuple[Triangulation, ObjectiveValue]:
    """Simulated annealing over single flips from ``start``.

    Proposals are uniform over flippable edges; improving moves are always
    taken and worsening ones with probability exp(-delta / temperature). The
    returned state is the best fully evaluated one (surrogate total, then
    disagreement). ``pool``, if given, collects fully evaluated states for a
    later exact pass.
    """
    config = config or SolverConfig()
    ev = evaluator or Evaluator(instance, config)
    rng = random.Random(f"{config.seed}:chain:{chain_id}")
    chain = _Chain(ev, start, config, rng)
    stats = SearchStats()

    def consider(value: ObjectiveValue, best: _Best | None) -> _Best:
        key = (value.total_upper, chain.dis)
        edges = tuple(sorted(chain.mesh.apex))
        if pool is not None:
            pool.setdefault(frozenset(edges), (key, edges))
        if best is None or key < best.key:
            best = _Best(key, edges, value)
            if on_improve is not None:
                on_improve(Triangulation(chain.ps, edges), value)
        return best

    best = consider(chain.refresh(), None)
    if best.value.total_upper == 0 or not chain.interior:
        return Triangulation(chain.ps, best.edges), best.value
    num_edges = len(chain.interior)
    budget = config.max_proposals or _default_proposals(chain.policy, num_edges)
    refresh_every = config.refresh_every or _default_refresh(chain.policy, num_edges)
    temp = config.initial_temperature or _calibrate(chain)
    batch = config.steps_per_temperature or max(1, 4 * len(chain.mesh.flippable()))
    since_refresh = 0
    while stats.proposals < budget:
        if deadline is not None and stats.proposals % 16 == 0 and time.monotonic() > deadline:
            break
        e = chain.propose()
        d, dd, f, update = chain.delta(e)
        stats.proposals += 1
        if d <= 0 or rng.random() < math.exp(-d / temp):
            chain.commit(e, dd, update)
            stats.accepted += 1
            since_refresh += 1
            full = chain.policy == "full"
            looks_better = chain.policy == "affected" and (chain.total(), chain.dis) < best.key
            if full or looks_better or since_refresh >= refresh_every:
                if not full:
                    chain.refresh()
                    stats.refreshes += 1
                since_refresh = 0
                best = consider(ObjectiveValue(tuple(chain.results), Mode.SURROGATE), best)
                if best.value.total_upper == 0:
                    break
        if stats.proposals % batch == 0:
            temp *= config.cooling
    if chain.policy != "full" and since_refresh:
        best = consider(chain.refresh(), best)
    stats.temperature = temp
    return Triangulation(chain.ps, best.edges), best.value


# -- driver ----------------------------------------------------------------------

@dataclass
class SolveResult:
    solution: Solution
    center: Triangulation
    objective: ObjectiveValue
    trajectory: list[tuple[float, int]] = field(default_factory=list)
    candidates: list[dict] = field(default_factory=list)
    timed_out: bool = False


def solve_detailed(
    instance: Instance,
    config: SolverConfig | None = None,
    on_improve: Callable[[Triangulation, ObjectiveValue], None] | None = None,
) -> SolveResult:
    """Candidates, then annealing from the best ``top_k`` of them.

    Stopping is driven by proposal budgets, so results depend only on the
    instance and the config. ``time_budget`` is a safety cap; a run that hits
    it returns its incumbent but is no longer reproducible.
    """
    config = config or SolverConfig()
    t0 = time.monotonic()
    deadline = t0 + config.time_budget
    ev = Evaluator(instance, config)
    result_trajectory: list[tuple[float, int]] = []
    state: dict = {"best": None}

    def offer(C: Triangulation, value: ObjectiveValue):
        key = (value.total_upper, ev.disagreement(C.edges))
        if state["best"] is None or key < state["best"][0]:
            state["best"] = (key, C, value)
            result_trajectory.append((time.monotonic() - t0, value.total_upper))
            if on_improve is not None:
                on_improve(C, value)

    cands = initial_candidates(instance, config.seed)
    if _policy(instance.n, config) == "none" and len(cands) > config.screen:
        # surrogate evaluation is costly here; keep the candidates that agree
        # most with the inputs
        order = sorted(range(len(cands)), key=lambda k: (ev.disagreement(cands[k].edges), k))
        screened = [cands[k] for k in order[: config.screen]]
    else:
        screened = cands
    scored = []
    for k, C in enumerate(screened):
        if time.monotonic() > deadline and scored:
            break
        value = ev.surrogate(C)
        scored.append(((value.total_upper, ev.disagreement(C.edges), k), C, value))
        offer(C, value)
    scored.sort(key=lambda s: s[0])
    info = [{"index": s[0][2], "surrogate": s[0][0], "disagreement": s[0][1]} for s in scored]

    pool: dict | None = {} if instance.n <= config.exact_threshold else None
    if pool is not None:
        for key, C, _ in scored:
            pool.setdefault(C.edge_set, (key[:2], C.edges))
    starts = scored[: config.top_k]
    timed_out = False
    for k, (_, C, value) in enumerate(starts):
        if state["best"][2].total_upper == 0:
            break
        now = time.monotonic()
        if now > deadline:
            timed_out = True
            break
        share = now + (deadline - now) / (len(starts) - k)
        local_search(instance, C, config, evaluator=ev, chain_id=k, deadline=share,
                     on_improve=offer, pool=pool)
        if time.monotonic() > share:
            timed_out = True

    ev.close()
    _, center, objective = state["best"]
    if pool is not None:
        center, objective = _exact_pass(instance, pool, config, center, objective)
        if objective.total_upper < result_trajectory[-1][1]:
            result_trajectory.append((time.monotonic() - t0, objective.total_upper))
            if on_improve is not None:
                on_improve(center, objective)
    solution = Solution(instance.uid, center.edges, objective.to_dict())
    return SolveResult(solution, center, objective, result_trajectory, info, timed_out)


POOL_SIZE = 16


def _exact_pass(instance, pool, config, center, objective):
    """Exact evaluation of the best pooled states; the best exact total wins.
    Falls back to the surrogate incumbent if no state can be solved exactly."""
    best = None
    for key, edges in heapq.nsmallest(POOL_SIZE, pool.values(), key=lambda kv: (kv[0], kv[1])):
        C = Triangulation(instance.pointset, edges)
        try:
            value = _exact_objective(C, instance.inputs, config)
        except ExactModeUnavailable:
            continue
        rank = (value.total_upper, key)
        if best is None or rank < best[0]:
            best = (rank, C, value)
    if best is None or best[2].total_upper > objective.total_upper:
        return center, objective
    return best[1], best[2]


def solve(instance: Instance, config: SolverConfig | None = None, on_improve=None) -> Solution:
    return solve_detailed(instance, config, on_improve).solution
