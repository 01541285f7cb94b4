"""Generate one rirs instance, then solve and verify it with several seeds.

Reports the best single-input surrogate objective, every verified run and
the peak resident memory.
"""
import argparse
import resource
import time

from flipcenter.instances import generate_rirs_instance, verify_solution
from flipcenter.solver import SolverConfig, evaluate, solve_detailed


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=5000)
    ap.add_argument("-m", type=int, default=20)
    ap.add_argument("--seed", type=int, default=9)
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--time-budget", type=float, default=300)
    args = ap.parse_args()
    t0 = time.monotonic()
    inst = generate_rirs_instance(args.n, args.m, seed=args.seed)
    print(f"generated in {time.monotonic() - t0:.1f}s")
    baseline = min(evaluate(T, inst).total_upper for T in inst.inputs)
    print(f"best single input: {baseline}")
    improved = 0
    for run in range(args.runs):
        t1 = time.monotonic()
        r = solve_detailed(inst, SolverConfig(seed=run, time_budget=args.time_budget))
        rep = verify_solution(inst, r.solution)
        improved += rep.accepted and rep.objective_upper < baseline
        print(f"run {run}: verified {rep.objective_upper} ({time.monotonic() - t1:.0f}s, "
              f"timed out {r.timed_out})")
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 2**20
    print(f"improved {improved}/{args.runs}; peak RSS {peak:.2f} GB")


if __name__ == "__main__":
    main()
