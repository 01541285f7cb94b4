"""Mean pairwise edge overlap of rirs instances, per seed and overall."""
import argparse
import itertools

from flipcenter.instances import generate_rirs_instance, overlap


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=500)
    ap.add_argument("-m", type=int, default=5)
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()
    means = []
    for seed in range(args.seeds):
        inst = generate_rirs_instance(args.n, args.m, seed=seed)
        pairs = [overlap(a, b) for a, b in itertools.combinations(inst.triangulations, 2)]
        means.append(sum(pairs) / len(pairs))
        print(f"seed {seed}: {100 * means[-1]:.2f}%")
    print(f"mean {100 * sum(means) / len(means):.2f}%")


if __name__ == "__main__":
    main()
