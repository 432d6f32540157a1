#!/usr/bin/env python3
"""Localization-window statistics over a Monte-Carlo batch.

Example:
    python3 scripts/localization_experiment.py --alpha 0.8 --beta 1 \
        --runs 100 --steps 300000 --seed 1 --out summary.json
"""

import argparse
import json

from stuckwalk.mc import BatchConfig, run_batch
from stuckwalk.spectrum import Params


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, required=True)
    ap.add_argument("--beta", type=float, required=True)
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--steps", type=int, default=100000)
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    params = Params.make(args.alpha, args.beta)
    cfg = BatchConfig(params=params, runs=args.runs, steps=args.steps,
                      master_seed=args.seed, workers=args.workers)
    result = run_batch(cfg)
    agg = result.aggregate
    print(f"alpha={args.alpha} (L={params.L}), {args.runs} runs x "
          f"{args.steps} steps")
    print(f"  size histogram: {agg.size_histogram}")
    print(f"  frac size L+2={params.L + 2}: {agg.frac_L2:.3f} "
          f"CI {tuple(round(v, 3) for v in agg.ci_L2)}")
    print(f"  frac size L+3={params.L + 3}: {agg.frac_L3:.3f}")
    print(f"  profile deviation mean={agg.mean_deviation:.4f} "
          f"max={agg.max_deviation:.4f}")
    if result.failures:
        print(f"  failures: {result.failures}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(agg.as_dict(), fh, indent=2, sort_keys=True)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
