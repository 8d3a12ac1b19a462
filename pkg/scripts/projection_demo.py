"""Project a perturbed bubble back onto the bubble set and compare with what was injected."""
import argparse

import numpy as np

from bubblelab.bubble import BubbleParams, bubble_grid, normalize
from bubblelab.energy import random_tangent
from bubblelab.projection import project_to_Z


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, default=30.0)
    ap.add_argument("--a", default="0.31,0.62")
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--eps", default="0,1e-3,1e-2")
    args = ap.parse_args()
    a = tuple(float(s) for s in args.a.split(","))
    z = bubble_grid(BubbleParams(args.lam, a), args.n)
    rng = np.random.default_rng(0)
    for eps in (float(s) for s in args.eps.split(",")):
        u = normalize(z + eps * random_tangent(z, rng, kmax=6)) if eps else z
        res = project_to_Z(u)
        p = res.params
        print(f"eps={eps:g}: distance {res.distance:.3e}, lambda {p.lam:.6f}, "
              f"a=({p.a[0]:.6f}, {p.a[1]:.6f}), polish steps {len(res.polish_history) - 1}")


if __name__ == "__main__":
    main()
