"""Single-pair filtering against collective concentration, ebits per input pair.

Filtering yields 2(1-p); collective measurement on k pairs approaches H(p).

    python3 scripts/filter_vs_collective.py --k 256
"""

import argparse

import numpy as np

from ebits.concentration import EnsembleSpec, exact_entropy_rate
from ebits.protocols import PairSpec, filter_branches
from ebits.schmidt import binary_entropy


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=256)
    ap.add_argument("--points", type=int, default=10)
    args = ap.parse_args()

    print(f"{'p':>6} {'H(p)':>9} {'filter':>9} {f'k={args.k}':>9}")
    for p in np.linspace(0.5, 0.99, args.points):
        p = float(p)
        filt = filter_branches(PairSpec(p)).expected_entanglement()
        coll = exact_entropy_rate(EnsembleSpec.of(args.k, p))
        print(f"{p:>6.3f} {binary_entropy(p):>9.5f} {filt:>9.5f} {coll:>9.5f}")


if __name__ == "__main__":
    main()
