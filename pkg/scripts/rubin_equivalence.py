#!/usr/bin/env python3
"""Distributional-equivalence check of the clock-race embedding.

Samples embedded-walk paths and compares them with the exact discrete path
law: prints total-variation distance and a chi-square p-value per
(alpha, beta) pair.

Example:
    python3 scripts/rubin_equivalence.py --horizon 6 --runs 100000 --seed 7
"""

import argparse

from stuckwalk.rubin import equivalence_report
from stuckwalk.spectrum import Params

DEFAULT_PAIRS = ((2.0, 0.5), (2.0, 1.0), (0.8, 1.0))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--horizon", type=int, default=6)
    ap.add_argument("--runs", type=int, default=100000)
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--alpha", type=float, default=None)
    ap.add_argument("--beta", type=float, default=None)
    args = ap.parse_args()

    pairs = DEFAULT_PAIRS
    if args.alpha is not None and args.beta is not None:
        pairs = ((args.alpha, args.beta),)
    for alpha, beta in pairs:
        rep = equivalence_report(Params.make(alpha, beta), args.horizon,
                                 args.runs, args.seed)
        # the 0.01 TV bound is calibrated for 1e5 samples; below that,
        # sampling noise dominates and only the chi-square verdict applies
        if args.runs >= 100000:
            verdict = "ok" if (rep["tv_distance"] <= 0.01
                               and rep["chi2_pvalue"] > 0.001) else "REJECT"
        else:
            verdict = "ok" if rep["chi2_pvalue"] > 0.001 else "REJECT"
        print(f"alpha={alpha} beta={beta}: TV={rep['tv_distance']:.4f} "
              f"chi2 p={rep['chi2_pvalue']:.4f} "
              f"({rep['cells']} pooled cells) {verdict}")


if __name__ == "__main__":
    main()
