"""Sampled normal Hessian gap at bubbles of several scales (alpha = 1.01 by default)."""
import argparse

import numpy as np

from bubblelab.bubble import BubbleParams
from bubblelab.energy import hessian_gap


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambdas", default="25,40")
    ap.add_argument("--alpha", type=float, default=1.01)
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for lam in (float(s) for s in args.lambdas.split(",")):
        gap = hessian_gap(BubbleParams(lam), args.alpha, samples=args.samples, n=args.n,
                          rng=np.random.default_rng(args.seed))
        print(f"lambda={lam:g} alpha={args.alpha:g} n={args.n}: gap {gap:.5f}")


if __name__ == "__main__":
    main()
