"""Instance and solution files, verification, generators and scoring.

Files are JSON. Instances look like::

    {"content_type": "flipcenter.instance", "instance_uid": "square",
     "meta": {}, "points": {"x": [0, 1, 1, 0], "y": [0, 0, 1, 1]},
     "triangulations": [[[0, 1], [0, 2], [0, 3], [1, 2], [2, 3]], ...]}

and solutions::

    {"content_type": "flipcenter.solution", "instance_uid": "square",
     "objective": {...}, "triangulation": [[0, 1], ...]}

Writers sort keys and edges, so equal objects give byte-identical files.
See docs/format.md for the full reference.
"""
from __future__ import annotations

import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .distance import (
    BudgetExhausted,
    DistanceResult,
    exact_distance,
    heuristic_distance,
)
from .geometry import DegenerateInput, Point
from .triangulation import (
    Edge,
    Mesh,
    PointSet,
    Triangulation,
    edge,
    greedy_random_triangulation,
    random_independent,
    triangulation_problems,
)

INSTANCE_TYPE = "flipcenter.instance"
SOLUTION_TYPE = "flipcenter.solution"

# one stream per purpose under the master seed
_POINTS, _TRIANGULATIONS, _CENTER, _WALKS = 0, 1, 2, 3


class ParseError(ValueError):
    """Malformed file. The message names the offending line or field."""


class ValidationError(ValueError):
    """Well-formed file whose triangulations violate invariants."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def _canon(edges: Iterable) -> tuple[Edge, ...]:
    return tuple(sorted(edge(int(u), int(v)) for u, v in edges))


@dataclass(frozen=True)
class Instance:
    uid: str
    points: tuple[Point, ...]
    triangulations: tuple[tuple[Edge, ...], ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(Point(int(x), int(y)) for x, y in self.points))
        object.__setattr__(self, "triangulations", tuple(_canon(t) for t in self.triangulations))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def m(self) -> int:
        return len(self.triangulations)

    @cached_property
    def pointset(self) -> PointSet:
        return PointSet(self.points)

    @cached_property
    def inputs(self) -> tuple[Triangulation, ...]:
        """The input triangulations as values (call :meth:`validate` first on untrusted data)."""
        ps = self.pointset
        return tuple(Triangulation(ps, t) for t in self.triangulations)

    def problems(self) -> list[str]:
        out = []
        if not self.triangulations:
            out.append("instance has no triangulations")
        for i, t in enumerate(self.triangulations):
            out.extend(f"triangulation {i}: {p}" for p in triangulation_problems(self.pointset, t))
        return out

    def validate(self) -> "Instance":
        problems = self.problems()
        if problems:
            raise ValidationError(problems)
        return self


@dataclass(frozen=True)
class Solution:
    instance_uid: str
    center: tuple[Edge, ...]
    objective_report: dict | None = None

    def __post_init__(self):
        object.__setattr__(self, "center", _canon(self.center))


# -- serialisation ---------------------------------------------------------------

def _dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def instance_to_dict(inst: Instance) -> dict:
    return {
        "content_type": INSTANCE_TYPE,
        "instance_uid": inst.uid,
        "points": {"x": [p.x for p in inst.points], "y": [p.y for p in inst.points]},
        "triangulations": [[list(e) for e in t] for t in inst.triangulations],
        "meta": inst.metadata,
    }


def solution_to_dict(sol: Solution) -> dict:
    doc = {
        "content_type": SOLUTION_TYPE,
        "instance_uid": sol.instance_uid,
        "triangulation": [list(e) for e in sol.center],
    }
    if sol.objective_report is not None:
        doc["objective"] = sol.objective_report
    return doc


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the same directory and rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_instance(inst: Instance, path) -> None:
    atomic_write_text(path, _dumps(instance_to_dict(inst)))


def write_solution(sol: Solution, path) -> None:
    atomic_write_text(path, _dumps(solution_to_dict(sol)))


def _load_json(path) -> Any:
    try:
        text = Path(path).read_text()
    except UnicodeDecodeError as e:
        raise ParseError(f"{path}: not a text file ({e})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None


def _int(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ParseError(f"{where}: expected an integer, got {x!r}")
    return x


def _edges(raw, n: int, where: str) -> list[Edge]:
    if not isinstance(raw, list):
        raise ParseError(f"{where}: expected a list of index pairs")
    out = []
    for k, e in enumerate(raw):
        if not isinstance(e, list) or len(e) != 2:
            raise ParseError(f"{where}[{k}]: expected a pair [u, v], got {e!r}")
        u, v = (_int(x, f"{where}[{k}]") for x in e)
        for x in (u, v):
            if not 0 <= x < n:
                raise ParseError(f"{where}[{k}]: point index {x} out of range 0..{n - 1}")
        if u == v:
            raise ParseError(f"{where}[{k}]: loop edge [{u}, {v}]")
        out.append((u, v))
    return out


def _field(doc: dict, key: str, path) -> Any:
    if key not in doc:
        raise ParseError(f"{path}: missing field '{key}'")
    return doc[key]


def parse_instance(doc: Any, path="<instance>") -> Instance:
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    if doc.get("content_type", INSTANCE_TYPE) != INSTANCE_TYPE:
        raise ParseError(f"{path}: content_type is {doc['content_type']!r}, not an instance")
    uid = _field(doc, "instance_uid", path)
    if not isinstance(uid, str):
        raise ParseError(f"{path}: instance_uid must be a string")
    pts = _field(doc, "points", path)
    if not isinstance(pts, dict) or not isinstance(pts.get("x"), list) or not isinstance(pts.get("y"), list):
        raise ParseError(f"{path}: points must be {{'x': [...], 'y': [...]}}")
    if len(pts["x"]) != len(pts["y"]):
        raise ParseError(f"{path}: points.x has {len(pts['x'])} entries but points.y has {len(pts['y'])}")
    xs = [_int(v, f"points.x[{i}]") for i, v in enumerate(pts["x"])]
    ys = [_int(v, f"points.y[{i}]") for i, v in enumerate(pts["y"])]
    n = len(xs)
    tris = _field(doc, "triangulations", path)
    if not isinstance(tris, list):
        raise ParseError(f"{path}: triangulations must be a list")
    edges = [_edges(t, n, f"triangulations[{i}]") for i, t in enumerate(tris)]
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise ParseError(f"{path}: meta must be an object")
    return Instance(uid, tuple(zip(xs, ys)), tuple(edges), meta)


def read_instance(path, validate: bool = True) -> Instance:
    """Parse an instance file. Raises ParseError for malformed content and
    ValidationError (listing every violated invariant) for bad geometry."""
    inst = parse_instance(_load_json(path), path)
    if validate:
        try:
            inst.validate()
        except ValueError as e:
            if isinstance(e, ValidationError):
                raise
            # duplicate points or a collinear point set
            raise ValidationError([str(e)]) from None
    return inst


def read_solution(path) -> Solution:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    if doc.get("content_type", SOLUTION_TYPE) != SOLUTION_TYPE:
        raise ParseError(f"{path}: content_type is {doc['content_type']!r}, not a solution")
    uid = _field(doc, "instance_uid", path)
    if not isinstance(uid, str):
        raise ParseError(f"{path}: instance_uid must be a string")
    # range checks happen against the instance during verification
    center = _edges(_field(doc, "triangulation", path), 2**63, "triangulation")
    objective = doc.get("objective")
    if objective is not None and not isinstance(objective, dict):
        raise ParseError(f"{path}: objective must be an object")
    return Solution(uid, tuple(center), objective)


# -- verification ------------------------------------------------------------------

def degenerate_quads(T: Triangulation) -> list[Edge]:
    """Interior edges whose quadrilateral has a straight corner. Such edges
    are treated as not flippable."""
    mesh = T.mesh
    out = []
    for e, (a, b) in sorted(mesh.apex.items()):
        if a == -1 or b == -1:
            continue
        u, v = e
        s1 = mesh.orient(b, v, a)
        s2 = mesh.orient(a, u, b)
        if (s1 == 0 and s2 >= 0) or (s2 == 0 and s1 >= 0):
            out.append(e)
    return out


@dataclass
class VerificationReport:
    instance_uid: str
    solution_uid: str
    problems: list[str]
    per_input: list[DistanceResult] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def uid_match(self) -> bool:
        return self.instance_uid == self.solution_uid

    @property
    def accepted(self) -> bool:
        return not self.problems

    @property
    def objective_upper(self) -> int | None:
        return sum(r.upper for r in self.per_input) if self.accepted else None

    @property
    def objective_lower(self) -> int | None:
        return sum(r.lower for r in self.per_input) if self.accepted else None

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "instance_uid": self.instance_uid,
            "solution_uid": self.solution_uid,
            "uid_match": self.uid_match,
            "problems": list(self.problems),
            "notes": list(self.notes),
            "objective": None if not self.accepted else {
                "upper": self.objective_upper,
                "lower": self.objective_lower,
                "per_input": [
                    {"lower": r.lower, "upper": r.upper, "exact": r.exact, "witness": r.witness.to_lists()}
                    for r in self.per_input
                ],
            },
        }

    def render(self) -> str:
        lines = [f"instance {self.instance_uid}: {'ACCEPTED' if self.accepted else 'REJECTED'}"]
        lines += [f"  problem: {p}" for p in self.problems]
        lines += [f"  note: {p}" for p in self.notes]
        if self.accepted:
            lines.append(f"  objective upper bound {self.objective_upper} (lower bound {self.objective_lower})")
            for i, r in enumerate(self.per_input):
                tag = "exact" if r.exact else f"in [{r.lower}, {r.upper}]"
                lines.append(f"  input {i}: {r.upper} parallel flips ({tag})")
        return "\n".join(lines)


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


def verify_solution(instance: Instance, solution: Solution, seed: int = 0, threads: int = 1) -> VerificationReport:
    """Check a solution from scratch. The submitted objective is ignored; the
    distance to every input is recomputed with a witness."""
    problems = []
    if instance.uid != solution.instance_uid:
        problems.append(f"instance uid mismatch: solution is for {solution.instance_uid!r}, instance is {instance.uid!r}")
    problems += triangulation_problems(instance.pointset, solution.center)
    report = VerificationReport(instance.uid, solution.instance_uid, problems)
    if problems:
        return report
    C = Triangulation(instance.pointset, solution.center)
    bad = degenerate_quads(C)
    if bad:
        report.notes.append(f"{len(bad)} edge(s) sit in quadrilaterals with a straight corner and count as not flippable: {bad[:10]}")
    report.per_input = _map(lambda T: heuristic_distance(C, T, seed=seed), instance.inputs, threads)
    return report


# -- generators ---------------------------------------------------------------------

def derived_seed(seed: int, *path: int) -> int:
    """64-bit seed for a sub-stream of ``seed``, via numpy's SeedSequence hashing."""
    return int(np.random.SeedSequence([seed, *path]).generate_state(1, np.uint64)[0])


def sample_points(n: int, coordinate_range: int, seed: int) -> list[Point]:
    """n distinct points, uniform on the integer grid [0, coordinate_range)^2.

    Duplicates are redrawn, at most 100 n redraws in total."""
    if n > coordinate_range * coordinate_range:
        raise DegenerateInput(f"cannot place {n} distinct points in a {coordinate_range}^2 grid")
    rng = np.random.default_rng(derived_seed(seed, _POINTS))
    seen: set[tuple[int, int]] = set()
    out: list[Point] = []
    retries = 0
    while len(out) < n:
        xy = rng.integers(0, coordinate_range, size=(n - len(out), 2))
        for x, y in xy.tolist():
            if (x, y) in seen:
                retries += 1
                if retries > 100 * n:
                    raise DegenerateInput(f"gave up after {retries} duplicate draws")
                continue
            seen.add((x, y))
            out.append(Point(x, y))
    return out


def overlap(T1: Iterable[Edge], T2: Iterable[Edge]) -> float:
    """Fraction of edges the two triangulations share."""
    a, b = set(T1), set(T2)
    return len(a & b) / len(a)


def generate_rirs_instance(
    n: int,
    m: int,
    coordinate_range: int | None = None,
    seed: int = 0,
    uid: str | None = None,
    threads: int = 1,
) -> Instance:
    """Uniform random points; m independent greedy random triangulations."""
    if n < 3 or m < 1:
        raise ValueError("need n >= 3 and m >= 1")
    coordinate_range = coordinate_range or max(1000, 10 * n)
    points = sample_points(n, coordinate_range, seed)
    ps = PointSet(points)
    seeds = [derived_seed(seed, _TRIANGULATIONS, i) for i in range(m)]
    tris = _map(lambda s: greedy_random_triangulation(ps, s).edges, seeds, threads)
    meta = {
        "class": "rirs",
        "n": n,
        "m": m,
        "coordinate_range": coordinate_range,
        "seed": seed,
        "triangulation_seeds": seeds,
    }
    return Instance(uid or f"rirs-n{n}-m{m}-s{seed}", tuple(points), tuple(tris), meta)


def random_walk(center: Triangulation, num_steps: int, prob: float, seed: int) -> Triangulation:
    """``num_steps`` rounds; each takes a random maximal independent set of
    flippable edges and flips each member with probability ``prob``. Rounds in
    which nothing is flipped still count."""
    rng = np.random.default_rng(seed)
    mesh: Mesh = center.mesh.copy()
    for _ in range(num_steps):
        chosen = random_independent(mesh, rng)
        keep = rng.random(len(chosen)) < prob
        for e, k in zip(chosen, keep):
            if k:
                mesh.flip(e)
    return Triangulation(center.pointset, mesh.apex.keys(), _mesh=mesh)


def center_objective(center: Triangulation, inputs: Sequence[Triangulation], exact_threshold: int = 12,
                     node_limit: int = 10**6) -> dict:
    """Objective of ``center``: exact when n is small enough and the search fits
    its budget, else the heuristic upper bound."""
    results = []
    for T in inputs:
        if center.n <= exact_threshold:
            try:
                results.append(exact_distance(center, T, node_limit=node_limit))
                continue
            except BudgetExhausted as e:
                results.append(e.result)
                continue
        results.append(heuristic_distance(center, T))
    return {
        "upper": sum(r.upper for r in results),
        "lower": sum(r.lower for r in results),
        "exact": all(r.exact for r in results),
    }


def generate_random_instance(
    n: int,
    m: int,
    num_steps: int = 10,
    prob: float = 0.5,
    seed: int = 0,
    points: Sequence | None = None,
    coordinate_range: int | None = None,
    uid: str | None = None,
    threads: int = 1,
) -> Instance:
    """Hidden greedy random center, then m independent random parallel flip walks.

    ``points`` overrides the uniform sampler (n is then ignored). The center,
    the walk seeds and the center's objective go into the metadata; the
    center is an upper bound witness for the optimum."""
    if not 0 < prob <= 1:
        raise ValueError("prob must lie in (0, 1]")
    if m < 1 or num_steps < 0:
        raise ValueError("need m >= 1 and num_steps >= 0")
    if points is None:
        if n < 3:
            raise DegenerateInput("need at least 3 points")
        coordinate_range = coordinate_range or max(1000, 10 * n)
        points = sample_points(n, coordinate_range, seed)
    points = [Point(int(p[0]), int(p[1])) for p in points]
    ps = PointSet(points)
    center_seed = derived_seed(seed, _CENTER)
    center = greedy_random_triangulation(ps, center_seed)
    walk_seeds = [derived_seed(seed, _WALKS, i) for i in range(m)]
    inputs = _map(lambda s: random_walk(center, num_steps, prob, s), walk_seeds, threads)
    meta = {
        "class": "random",
        "n": ps.n,
        "m": m,
        "num_steps": num_steps,
        "prob": prob,
        "seed": seed,
        "coordinate_range": coordinate_range,
        "center_seed": center_seed,
        "walk_seeds": walk_seeds,
        "center": [list(e) for e in center.edges],
        "center_objective": center_objective(center, inputs),
    }
    return Instance(uid or f"random-n{ps.n}-m{m}-s{seed}", tuple(points), tuple(T.edges for T in inputs), meta)


def replay_walks(inst: Instance) -> list[tuple[Edge, ...]]:
    """Rebuild every input of a random-class instance from its stored center and walk seeds."""
    meta = inst.metadata
    center = Triangulation(inst.pointset, (tuple(e) for e in meta["center"]))
    return [random_walk(center, meta["num_steps"], meta["prob"], s).edges for s in meta["walk_seeds"]]


# -- scoring -------------------------------------------------------------------------

@dataclass(frozen=True)
class ScoreTable:
    rank_points: tuple[int, ...] = (40, 32, 25, 19, 14, 10, 7, 5, 4, 3, 2, 1)

    def __post_init__(self):
        pts = self.rank_points
        if any(a <= b for a, b in zip(pts, pts[1:])):
            raise ValueError("rank points must be strictly decreasing")

    def points(self, rank: int) -> int:
        return self.rank_points[rank - 1] if 1 <= rank <= len(self.rank_points) else 0


def score(objectives: Mapping[str, int], table: ScoreTable = ScoreTable()) -> dict[str, int]:
    """Points per team on one instance. Lower objective is better; a team's
    rank is one plus the number of strictly better teams, so ties share points
    and the next value skips the ranks they used."""
    values = sorted(objectives.values())
    out = {}
    for team, v in objectives.items():
        better = int(np.searchsorted(values, v, side="left"))
        out[team] = table.points(better + 1)
    return out


def score_totals(per_instance: Mapping[str, Mapping[str, int]], table: ScoreTable = ScoreTable()) -> dict[str, int]:
    """Sum of per-instance points; teams absent from an instance get nothing there."""
    totals: dict[str, int] = {}
    for objectives in per_instance.values():
        for team, pts in score(objectives, table).items():
            totals[team] = totals.get(team, 0) + pts
    return dict(sorted(totals.items()))
