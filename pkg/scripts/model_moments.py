"""Monte-Carlo moments of the random model for several truncations M.

Shows how far the odd moments sit from 0 at fixed L as M grows.
"""

import argparse

from arithdist.randommodel import ModelConfig, model_moments_mc


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=float, default=50)
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--M", type=int, nargs="+", default=[1000, 3000, 10000])
    args = ap.parse_args()
    for M in args.M:
        rep = model_moments_mc(ModelConfig(M, args.L, args.trials, args.seed, 6))
        cells = " ".join(f"m{i + 1}={e:+.3f}({s:.3f})"
                         for i, (e, s) in enumerate(zip(rep.estimates, rep.standard_errors)))
        print(f"M={M:6d} {cells}", flush=True)


if __name__ == "__main__":
    main()
