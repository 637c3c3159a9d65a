"""Concentration yield per pair against block size k.

Prints the exact collective-measurement rate, the rate after batching and
trimming, and a seeded simulation of the batched protocol, next to H(p).

    python3 scripts/yield_curve.py --p 0.75 --kmax 64 --trials 2000
"""

import argparse

import numpy as np

from ebits.concentration import EnsembleSpec, batched_yield_rate, exact_entropy_rate, simulate_yield
from ebits.schmidt import binary_entropy


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=0.75)
    ap.add_argument("--kmax", type=int, default=64)
    ap.add_argument("--groups", type=int, default=4, help="groups of k pairs per batch")
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"H({args.p}) = {binary_entropy(args.p):.6f}")
    print(f"{'k':>6} {'exact':>10} {'batched':>10} {'simulated':>10} {'stderr':>9}")
    k = 2
    while k <= args.kmax:
        spec = EnsembleSpec.of(k, args.p)
        batch = args.groups * k
        sim = simulate_yield(spec, batch, args.trials, rng)
        print(f"{k:>6} {exact_entropy_rate(spec):>10.6f} {batched_yield_rate(spec, batch):>10.6f} "
              f"{sim.mean_rate:>10.6f} {sim.stderr:>9.6f}")
        k *= 2


if __name__ == "__main__":
    main()
