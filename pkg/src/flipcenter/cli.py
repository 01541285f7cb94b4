"""Command line: solve | verify | distance | generate | score | draw.

Exit codes: 0 success (verify: accepted), 1 invalid input or rejected
solution, 2 unreadable or malformed files.
"""
from __future__ import annotations

import argparse
import configparser
import json
import os
import secrets
import sys
import time
from pathlib import Path
from xml.sax.saxutils import escape

from . import __version__
from .distance import BudgetExhausted, exact_distance, heuristic_distance
from .instances import (
    Instance,
    ParseError,
    ValidationError,
    atomic_write_text,
    generate_random_instance,
    generate_rirs_instance,
    read_instance,
    read_solution,
    score,
    score_totals,
    verify_solution,
    write_instance,
    write_solution,
)
from .solver import SolverConfig, solve_detailed
from .triangulation import Triangulation

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _fail(msg: str, code: int):
    raise CliError(msg, code)


def _read_instance(path, validate=True) -> Instance:
    try:
        return read_instance(path, validate=validate)
    except OSError as e:
        _fail(f"cannot read {path}: {e.strerror or e}", EXIT_IO)
    except ParseError as e:
        _fail(f"parse error: {e}", EXIT_IO)
    except ValidationError as e:
        _fail("invalid instance:\n  " + "\n  ".join(e.problems), EXIT_INVALID)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _seed(args) -> int:
    return args.seed if args.seed is not None else secrets.randbits(32)


def _threads(args) -> int:
    return args.threads if args.threads is not None else (os.cpu_count() or 1)


# -- solve ----------------------------------------------------------------------

def load_config(path) -> dict:
    """Key-value options from the [solver] section of an INI file."""
    parser = configparser.ConfigParser()
    try:
        with open(path) as f:
            parser.read_file(f)
    except OSError as e:
        _fail(f"cannot read config {path}: {e.strerror or e}", EXIT_IO)
    except configparser.Error as e:
        _fail(f"bad config {path}: {e}", EXIT_IO)
    if not parser.has_section("solver"):
        return {}
    return dict(parser.items("solver"))


def _resolve_config(args, seed: int, threads: int) -> SolverConfig:
    values = load_config(args.config) if args.config else {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            _fail(f"--set expects key=value, got {item!r}", EXIT_INVALID)
        values[key.strip()] = value.strip()
    if args.time_budget is not None:
        values["time_budget"] = args.time_budget
    values["seed"] = seed
    values["threads"] = threads
    try:
        return SolverConfig.from_mapping(values)
    except (TypeError, ValueError) as e:
        _fail(f"bad solver option: {e}", EXIT_INVALID)


def cmd_solve(args) -> int:
    started = time.time()
    inst = _read_instance(args.instance)
    seed = _seed(args)
    config = _resolve_config(args, seed, _threads(args))
    out = Path(args.output or f"{Path(args.instance).stem}.solution.json")
    manifest_path = Path(args.manifest) if args.manifest else out.with_name(out.name + ".manifest.json")
    trajectory: list[list] = []

    def manifest(final: bool, objective=None) -> dict:
        return {
            "command": "solve",
            "argv": sys.argv[1:],
            "version": __version__,
            "instance": str(args.instance),
            "instance_uid": inst.uid,
            "output": str(out),
            "config": config.to_dict(),
            "seed": seed,
            "seed_from_entropy": args.seed is None,
            "started": started,
            "wall_clock": time.time() - started,
            "trajectory": trajectory,
            "finished": final,
            "objective": objective,
        }

    t0 = time.monotonic()

    def on_improve(C: Triangulation, value):
        from .instances import Solution

        trajectory.append([round(time.monotonic() - t0, 6), value.total_upper])
        write_solution(Solution(inst.uid, C.edges, value.to_dict()), out)
        atomic_write_text(manifest_path, _dump(manifest(False, value.to_dict())))

    result = solve_detailed(inst, config, on_improve=on_improve)
    write_solution(result.solution, out)
    doc = manifest(True, result.objective.to_dict())
    doc["timed_out"] = result.timed_out
    doc["candidates"] = result.candidates
    atomic_write_text(manifest_path, _dump(doc))
    print(f"{inst.uid}: objective {result.objective.total_upper} "
          f"({result.objective.mode.value}, lower bound {result.objective.total_lower}) -> {out}")
    return EXIT_OK


# -- verify ---------------------------------------------------------------------

def cmd_verify(args) -> int:
    inst = _read_instance(args.instance)
    try:
        sol = read_solution(args.solution)
    except OSError as e:
        _fail(f"cannot read {args.solution}: {e.strerror or e}", EXIT_IO)
    except ParseError as e:
        _fail(f"parse error: {e}", EXIT_IO)
    report = verify_solution(inst, sol, seed=args.seed or 0, threads=_threads(args))
    print(_dump(report.to_dict()) if args.json else report.render())
    return EXIT_OK if report.accepted else EXIT_INVALID


# -- distance -------------------------------------------------------------------

def cmd_distance(args) -> int:
    inst = _read_instance(args.file)
    if inst.m < 2:
        _fail(f"{args.file} holds {inst.m} triangulation(s); need two", EXIT_INVALID)
    for k in (args.i, args.j):
        if not 0 <= k < inst.m:
            _fail(f"triangulation index {k} out of range 0..{inst.m - 1}", EXIT_INVALID)
    T1, T2 = inst.inputs[args.i], inst.inputs[args.j]
    seed = args.seed or 0
    if args.exact:
        try:
            r = exact_distance(T1, T2, node_limit=args.node_limit, seed=seed)
        except BudgetExhausted as e:
            r = e.result
    else:
        r = heuristic_distance(T1, T2, seed=seed, restarts=args.restarts)
    doc = {"lower": r.lower, "upper": r.upper, "exact": r.exact}
    if args.witness:
        doc["witness"] = r.witness.to_lists()
    if args.json:
        print(_dump(doc), end="")
    else:
        print(f"lower {r.lower}\nupper {r.upper}\nexact {str(r.exact).lower()}")
        if args.witness:
            for s, step in enumerate(r.witness):
                print(f"step {s + 1}: " + " ".join(f"{u}-{v}" for u, v in step))
    return EXIT_OK


# -- generate -------------------------------------------------------------------

def _read_points(path) -> list[tuple[int, int]]:
    """JSON {"x": [...], "y": [...]} or whitespace-separated "x y" lines."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        _fail(f"cannot read {path}: {e.strerror or e}", EXIT_IO)
    try:
        doc = json.loads(text)
        return list(zip(doc["x"], doc["y"]))
    except (json.JSONDecodeError, TypeError, KeyError):
        pass
    pts = []
    for k, line in enumerate(text.splitlines(), 1):
        line = line.split("#")[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        try:
            pts.append((int(parts[0]), int(parts[1])))
        except (ValueError, IndexError):
            _fail(f"{path}: line {k}: expected two integers", EXIT_IO)
    return pts


def cmd_generate(args) -> int:
    seed = _seed(args)
    threads = _threads(args)
    try:
        if args.kind == "rirs":
            inst = generate_rirs_instance(args.n, args.m, args.coordinate_range, seed, uid=args.uid, threads=threads)
        else:
            points = _read_points(args.points) if args.points else None
            inst = generate_random_instance(
                args.n or 0, args.m, args.num_steps, args.prob, seed, points=points,
                coordinate_range=args.coordinate_range, uid=args.uid, threads=threads,
            )
    except ValueError as e:
        _fail(f"cannot generate: {e}", EXIT_INVALID)
    try:
        write_instance(inst, args.output)
    except OSError as e:
        _fail(f"cannot write {args.output}: {e.strerror or e}", EXIT_IO)
    print(f"{inst.uid}: n={inst.n} m={inst.m} seed={seed} -> {args.output}")
    return EXIT_OK


# -- score ----------------------------------------------------------------------

def _read_results(directory) -> dict[str, dict[str, int]]:
    """Each *.json file is one instance: {"team": objective, ...}, optionally
    wrapped as {"instance_uid": ..., "objectives": {...}}."""
    d = Path(directory)
    if not d.is_dir():
        _fail(f"{directory} is not a directory", EXIT_IO)
    out = {}
    for f in sorted(d.glob("*.json")):
        try:
            doc = json.loads(f.read_text())
        except (OSError, json.JSONDecodeError) as e:
            _fail(f"cannot read {f}: {e}", EXIT_IO)
        uid = f.stem
        if isinstance(doc, dict) and "objectives" in doc:
            uid = doc.get("instance_uid", uid)
            doc = doc["objectives"]
        if not isinstance(doc, dict) or not all(isinstance(v, int) and v >= 0 for v in doc.values()):
            _fail(f"{f}: expected a map from team to nonnegative integer objective", EXIT_IO)
        out[uid] = doc
    return out


def cmd_score(args) -> int:
    results = _read_results(args.results)
    per = {uid: score(obj) for uid, obj in results.items()}
    totals = score_totals(results)
    if args.json:
        print(_dump({"per_instance": per, "totals": totals}), end="")
    else:
        for uid, pts in per.items():
            print(uid + ": " + ", ".join(f"{t} {p}" for t, p in sorted(pts.items())))
        print("totals:")
        for team, p in sorted(totals.items(), key=lambda kv: (-kv[1], kv[0])):
            print(f"  {team} {p}")
    return EXIT_OK


# -- draw -----------------------------------------------------------------------

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22")


def render_svg(inst: Instance, center=None, inputs=None, size: int = 800) -> str:
    xs = [p.x for p in inst.points]
    ys = [p.y for p in inst.points]
    x0, y0 = min(xs), min(ys)
    span = max(max(xs) - x0, max(ys) - y0, 1)
    pad = 20
    scale = (size - 2 * pad) / span

    def at(i):
        # flip y so the picture has the usual orientation
        return pad + (xs[i] - x0) * scale, size - pad - (ys[i] - y0) * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f"<title>{escape(inst.uid)}</title>",
        "<style>.input{stroke-width:1;stroke-opacity:.45;fill:none}"
        ".center{stroke:#d62728;stroke-width:2.5;fill:none}.point{fill:#000}</style>",
    ]
    which = range(inst.m) if inputs is None else inputs
    for k in which:
        colour = PALETTE[k % len(PALETTE)]
        out.append(f'<g class="input input-{k}" stroke="{colour}">')
        for u, v in inst.triangulations[k]:
            (a, b), (c, d) = at(u), at(v)
            out.append(f'<line x1="{a:.2f}" y1="{b:.2f}" x2="{c:.2f}" y2="{d:.2f}"/>')
        out.append("</g>")
    if center is not None:
        out.append('<g class="center">')
        for u, v in center:
            (a, b), (c, d) = at(u), at(v)
            out.append(f'<line class="center" x1="{a:.2f}" y1="{b:.2f}" x2="{c:.2f}" y2="{d:.2f}"/>')
        out.append("</g>")
    r = max(1.0, min(4.0, 200 / max(inst.n, 1) ** 0.5))
    out.append('<g class="points">')
    for i in range(inst.n):
        a, b = at(i)
        out.append(f'<circle class="point" cx="{a:.2f}" cy="{b:.2f}" r="{r:.2f}"/>')
    out.append("</g></svg>")
    return "\n".join(out) + "\n"


def cmd_draw(args) -> int:
    inst = _read_instance(args.instance, validate=False)
    center = None
    if args.solution:
        try:
            center = read_solution(args.solution).center
        except OSError as e:
            _fail(f"cannot read {args.solution}: {e.strerror or e}", EXIT_IO)
        except ParseError as e:
            _fail(f"parse error: {e}", EXIT_IO)
    inputs = None
    if args.inputs is not None:
        try:
            inputs = [int(k) for k in args.inputs.split(",") if k.strip()]
        except ValueError:
            _fail("--inputs expects comma-separated indices", EXIT_INVALID)
        if any(not 0 <= k < inst.m for k in inputs):
            _fail(f"--inputs indices must lie in 0..{inst.m - 1}", EXIT_INVALID)
    try:
        Path(args.output).write_text(render_svg(inst, center, inputs, args.size))
    except OSError as e:
        _fail(f"cannot write {args.output}: {e.strerror or e}", EXIT_IO)
    print(f"wrote {args.output}")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flipcenter", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int, default=None, help="master seed (default: drawn from entropy for solve/generate, 0 otherwise)")
        sp.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores); results do not depend on it")

    s = sub.add_parser("solve", help="search for a center triangulation")
    s.add_argument("instance")
    s.add_argument("-o", "--output", help="solution file (default: <instance stem>.solution.json)")
    s.add_argument("--config", help="INI file with a [solver] section of SolverConfig keys")
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one solver option (repeatable)")
    s.add_argument("--time-budget", type=float, help="hard wall-clock cap in seconds")
    s.add_argument("--manifest", help="manifest path (default: <output>.manifest.json)")
    common(s)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a solution and recompute its objective")
    v.add_argument("instance")
    v.add_argument("solution")
    v.add_argument("--json", action="store_true", help="machine-readable report")
    common(v)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("distance", help="parallel flip distance between two triangulations of one file")
    d.add_argument("file", help="instance file; triangulations --i and --j are compared")
    d.add_argument("--i", type=int, default=0)
    d.add_argument("--j", type=int, default=1)
    mode = d.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="iterative deepening search (small n)")
    mode.add_argument("--heuristic", action="store_true", help="greedy walk upper bound (default)")
    d.add_argument("--restarts", type=int, default=None)
    d.add_argument("--node-limit", type=int, default=10**7)
    d.add_argument("--witness", action="store_true", help="print the flip sequence")
    d.add_argument("--json", action="store_true")
    common(d)
    d.set_defaults(func=cmd_distance)

    g = sub.add_parser("generate", help="write a random or rirs instance")
    g.add_argument("kind", choices=["random", "rirs"])
    g.add_argument("-n", type=int, help="number of points")
    g.add_argument("-m", type=int, required=True, help="number of triangulations")
    g.add_argument("--num-steps", type=int, default=10, help="random: walk rounds")
    g.add_argument("--prob", type=float, default=0.5, help="random: flip probability per chosen edge")
    g.add_argument("--points", help="random: point file instead of uniform sampling")
    g.add_argument("--coordinate-range", type=int, default=None, help="coordinates drawn from [0, R)")
    g.add_argument("--uid", default=None)
    g.add_argument("-o", "--output", required=True)
    common(g)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("score", help="rank points per instance and totals")
    c.add_argument("results", help="directory of <instance>.json files mapping team to objective")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_score)

    w = sub.add_parser("draw", help="SVG drawing of an instance and optional solution")
    w.add_argument("instance")
    w.add_argument("--solution")
    w.add_argument("--inputs", help="comma-separated input indices to draw (default: all)")
    w.add_argument("--size", type=int, default=800)
    w.add_argument("-o", "--output", required=True)
    w.set_defaults(func=cmd_draw)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "generate" and args.kind == "rirs" and not args.n:
        print("flipcenter: error: rirs needs -n", file=sys.stderr)
        return EXIT_INVALID
    if args.command == "generate" and args.kind == "random" and not args.n and not args.points:
        print("flipcenter: error: random needs -n or --points", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except CliError as e:
        print(f"flipcenter: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
