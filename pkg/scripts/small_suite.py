"""Solve small random-class instances and compare with the hidden center."""
import argparse
import time

from flipcenter.instances import generate_random_instance
from flipcenter.solver import SolverConfig, solve_detailed


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--num-steps", type=int, default=3)
    ap.add_argument("--prob", type=float, default=0.5)
    args = ap.parse_args()
    wins = ties = 0
    for s in range(args.count):
        n, m = 8 + s % 5, 3 + s % 3
        inst = generate_random_instance(n, m, num_steps=args.num_steps, prob=args.prob, seed=600 + s)
        hidden = inst.metadata["center_objective"]["upper"]
        t0 = time.monotonic()
        r = solve_detailed(inst, SolverConfig(seed=600 + s))
        got = r.objective.total_upper
        wins += got < hidden
        ties += got == hidden
        print(f"{inst.uid}: solver {got} ({r.objective.mode.value}) hidden center {hidden} "
              f"{time.monotonic() - t0:.1f}s")
    print(f"better than the hidden center on {wins}, equal on {ties}, of {args.count}")


if __name__ == "__main__":
    main()
