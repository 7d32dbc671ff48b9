"""Sharp progression statistics for a list of primes (divisor and hecke modes)."""

import argparse

from arithdist import arith
from arithdist.progressions import ProgressionConfig, progression_experiment
from arithdist.stats import ks_to_normal


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--phi", type=float, default=25)
    ap.add_argument("--p", type=int, nargs="+", default=[1009, 2003, 4001, 10007])
    args = ap.parse_args()
    cf = arith.estimate_cf(arith.hecke_table(), 1e6)
    for p in args.p:
        for mode in ("divisor", "hecke"):
            try:
                cfg = ProgressionConfig(p, args.phi, mode, cf_value=cf if mode == "hecke" else None)
            except ValueError as e:
                print(f"p={p} {mode}: skipped ({e})")
                continue
            d = progression_experiment(cfg)
            print(f"p={p:6d} {mode:8s} X={cfg.X:12.0f} mean={d.mean():+.4f} "
                  f"var={d.variance():.4f} KS={ks_to_normal(d):.4f}")


if __name__ == "__main__":
    main()
