"""Generate and validate the largest rirs size (12500 points, 200 inputs).

Not part of the test suite: it takes a long time on one core. Prints
timings and peak memory.
"""
import argparse
import resource
import time

from flipcenter.instances import generate_rirs_instance, write_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=12500)
    ap.add_argument("-m", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("-o", "--output", default=None)
    args = ap.parse_args()
    t0 = time.monotonic()
    inst = generate_rirs_instance(args.n, args.m, seed=args.seed)
    t1 = time.monotonic()
    problems = inst.problems()
    t2 = time.monotonic()
    print(f"generated in {t1 - t0:.0f}s, validated in {t2 - t1:.0f}s, {len(problems)} problems")
    if args.output:
        write_instance(inst, args.output)
    print(f"peak RSS {resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 2**20:.2f} GB")


if __name__ == "__main__":
    main()
