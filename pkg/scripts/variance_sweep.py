"""Sample variance of the short-interval statistics against L.

For each L prints the variance of S(x, L) divided by (16/pi^2) log^3 L / L,
and the variance of the normalised increment over [x, x + sqrt(x)/L]. The
increment spans 1/(2L) in sqrt-scale, so its variance tracks
(log 2L / log L)^3 times the first ratio until log 2 is small against log L.
"""

import argparse
import math

from arithdist.shortintervals import ShortIntervalConfig, distribution_experiment, variance_experiment
from arithdist.stats import ks_to_normal


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=float, default=1e8)
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--L", type=float, nargs="+", default=[4, 8, 16, 32, 64])
    args = ap.parse_args()
    print(f"{'L':>6} {'S ratio':>9} {'theorem var':>12} {'predicted':>10} {'KS':>7}")
    for L in args.L:
        cfg = ShortIntervalConfig(args.T, L, args.samples, args.seed)
        ratio = variance_experiment(cfg).ratio_to_asymptotic
        d = distribution_experiment(cfg)
        pred = ratio * (math.log(2 * L) / math.log(L)) ** 3
        print(f"{L:6g} {ratio:9.4f} {d.variance():12.4f} {pred:10.4f} {ks_to_normal(d):7.4f}")


if __name__ == "__main__":
    main()
