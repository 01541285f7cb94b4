"""Lower bound, exact distance and heuristic upper bound on random small pairs.

Prints one row per pair and a summary of how often the heuristic is exact.
"""
import argparse
import time

import numpy as np

from flipcenter.distance import distance_lower_bound, exact_distance, heuristic_distance, replay
from flipcenter.triangulation import PointSet, greedy_random_triangulation


def random_points(rng, n, span):
    while True:
        pts = {tuple(map(int, p)) for p in rng.integers(0, span, size=(3 * n, 2))}
        pts = sorted(pts)[:n]
        if len(pts) < n:
            continue
        try:
            return PointSet(pts)
        except ValueError:
            continue


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=200)
    ap.add_argument("--max-n", type=int, default=10)
    ap.add_argument("--span", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    t0 = time.monotonic()
    tight = 0
    for i in range(args.pairs):
        n = int(rng.integers(4, args.max_n + 1))
        ps = random_points(rng, n, args.span)
        T1 = greedy_random_triangulation(ps, 2 * i)
        T2 = greedy_random_triangulation(ps, 2 * i + 1)
        lb = distance_lower_bound(T1, T2)
        ex = exact_distance(T1, T2)
        h = heuristic_distance(T1, T2, seed=i)
        assert lb <= ex.upper <= h.upper and replay(T1, h.witness) == T2
        tight += h.upper == ex.upper
        print(f"{i:4d} n={n:2d} lower={lb} exact={ex.upper} heuristic={h.upper}")
    print(f"heuristic exact on {tight}/{args.pairs} pairs, {time.monotonic() - t0:.1f}s")


if __name__ == "__main__":
    main()
