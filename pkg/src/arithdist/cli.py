"""Command-line front end.

Every subcommand writes its CSV/JSON outputs and a ``manifest.json`` into
``--out`` and prints a one-line summary. Exit codes: 0 success, 2 invalid
input, 3 accuracy gate or accuracy error.

Parameters may also come from ``--config FILE`` (flat ``key = value`` lines,
keys spelled like the long flags); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import sys
from pathlib import Path

import numpy as np

from . import _parallel, arith, kloosterman, progressions, randommodel, shortintervals, special
from .special import QuadratureAccuracyError
from .stats import EmpiricalDistribution, histogram_rows, ks_to_normal, summary
from .windows import WindowSpec

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ACCURACY = 3


class UsageError(ValueError):
    """Missing or inconsistent command-line parameters."""


class GateFailure(RuntimeError):
    """A numerical check finished but missed its gate."""


def tool_version() -> str:
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:
        return "0.1.0"


# ---------------------------------------------------------------------------
# output helpers


class Outputs:
    """Collects files written by one run for the manifest."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def csv(self, name: str, header, rows) -> Path:
        path = self.root / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        self.files.append(str(path))
        return path

    def json(self, name: str, obj) -> Path:
        path = self.root / name
        write_json(path, obj)
        self.files.append(str(path))
        return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(obj), fh, sort_keys=True, indent=2, ensure_ascii=False)
        fh.write("\n")


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"{args.command} requires {flags}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_sieve(args, out: Outputs) -> tuple[dict, str]:
    _need(args, "N")
    n = int(args.N)
    if args.kind == "divisor":
        table = arith.build_divisor_table(n)
        rows = [(i, int(table.values[i])) for i in range(1, min(n, args.rows) + 1)]
        res = {"N": n, "kind": "divisor", "D": int(table.prefix[n]),
               "D2": int(table.d2_prefix()[n]), "delta": arith.delta(n)}
        line = f"sieve divisor N={n} D(N)={res['D']}"
    else:
        table = arith.build_hecke_table(12, n)
        rows = [(i, int(table.exact[i]), float(table.normalized[i]))
                for i in range(1, min(n, args.rows) + 1)]
        res = {"N": n, "kind": "hecke", "k": 12, "A_f": float(table.prefix_normalized[n])}
        line = f"sieve hecke N={n} A_f(N)={res['A_f']:.6g}"
    header = ("n", "d") if args.kind == "divisor" else ("n", "tau", "rho")
    out.csv("table.csv", header, rows)
    cache = out.root / f"{args.kind}_{n}.bin"
    arith.save_table(table, cache)
    out.files.append(str(cache))
    out.json("summary.json", res)
    return res, line


def cmd_kloosterman(args, out: Outputs) -> tuple[dict, str]:
    _need(args, "p")
    p = int(args.p)
    row = kloosterman.kl2_table(p)
    out.csv("kl2.csv", ("b", "kl2"), [(b, float(v)) for b, v in enumerate(row)])
    res = {"p": p, "maxAbsKl2": float(np.max(np.abs(row))), "weilBound": 2.0}
    if p <= 400:
        g = kloosterman.orthogonality_matrix(p)
        m = np.arange(1, p)
        err = 0.0
        for i in m:
            exact = np.where(m == i, 1.0 - 1.0 / (p * (p - 1)), -(p + 1) / (p * (p - 1)))
            err = max(err, float(np.max(np.abs(g[i, 1:] - exact))))
        res["orthogonalityMaxError"] = err
    if args.a is not None and args.b is not None:
        res["a"], res["b"] = int(args.a), int(args.b)
        res["kl2_ab"] = kloosterman.kl2(args.a, args.b, p)
    out.json("summary.json", res)
    return res, f"kloosterman p={p} max|Kl2|={res['maxAbsKl2']:.6f}"


def _progression_config(args, window=True) -> progressions.ProgressionConfig:
    _need(args, "p", "phi")
    cf = None
    if args.mode == "hecke":
        cf = args.cf if args.cf is not None else arith.estimate_cf(arith.hecke_table(), 1e6)
    spec = WindowSpec(args.delta) if (window and args.delta is not None) else None
    return progressions.ProgressionConfig(int(args.p), float(args.phi), args.mode, spec, cf)


def cmd_voronoi_check(args, out: Outputs) -> tuple[dict, str]:
    _need(args, "delta")
    cfg = _progression_config(args)
    direct = progressions.smoothed_progression_values(cfg)
    dual = progressions.voronoi_dual_values(cfg, tol=args.dual_tol)
    diff = np.abs(direct.values - dual.values)
    rows = [(a, float(x), float(y), float(d))
            for a, x, y, d in zip(direct.residues, direct.values, dual.values, diff)]
    out.csv("voronoi.csv", ("a", "direct", "dual", "absDiff"), rows)
    res = {**cfg.echo(), "maxAbsDiff": float(diff.max()), "gate": args.tol,
           "tailBound": dual.tail_bound, "rmsTailEstimate": dual.rms_estimate,
           "xiMax": dual.xi_max, "terms": dual.terms, "passed": bool(diff.max() <= args.tol)}
    out.json("summary.json", res)
    line = f"voronoi-check max|direct-dual|={diff.max():.3e} gate={args.tol:g}"
    if not res["passed"]:
        raise GateFailure(line)
    return res, line


def cmd_progressions(args, out: Outputs) -> tuple[dict, str]:
    cfg = _progression_config(args)
    if cfg.window is None:
        r = progressions.sharp_progression_values(cfg)
    else:
        r = progressions.smoothed_progression_values(cfg)
    out.csv("progressions.csv", ("a", "S", "E"),
            [(a, _fmt(s), float(e)) for a, s, e in zip(r.residues, r.sums, r.values)])
    d = EmpiricalDistribution.from_samples(r.values)
    st = summary(d)
    res = {"p": cfg.p, "Phi": cfg.phi, "X": cfg.X, "mode": cfg.mode, "mean": st["mean"],
           "variance": st["variance"], "KS": st["ks"], "meanTermUsed": r.mean_term,
           "normalizationUsed": r.normalization, "smoothed": r.smoothed, "notes": r.notes}
    if cfg.cf_value is not None:
        res["cf"] = cfg.cf_value
    if cfg.window is not None:
        res["delta"] = cfg.window.delta
    out.json("summary.json", res)
    out.csv("histogram.csv", ("binLeft", "binRight", "count", "empiricalDensity", "normalDensity"),
            histogram_rows(d))
    return res, f"progressions {cfg.mode} p={cfg.p} KS={st['ks']:.4f} var={st['variance']:.4f}"


def cmd_short_intervals(args, out: Outputs) -> tuple[dict, str]:
    _need(args, "T", "L", "samples", "seed")
    cf = None
    if args.mode == "hecke":
        cf = args.cf if args.cf is not None else arith.estimate_cf(arith.hecke_table(), 1e6)
    cfg = shortintervals.ShortIntervalConfig(float(args.T), float(args.L), int(args.samples),
                                             int(args.seed), args.mode, cf)
    if args.statistic == "increment":
        samples = shortintervals.increment_samples(cfg)
        target = shortintervals.sigma_sq_asymptotic(cfg.L, cfg.mode, cf)
    else:
        samples = shortintervals.theorem_samples(cfg)
        target = 1.0
    out.csv("samples.csv", ("x", "statistic"), [(s.x, s.statistic) for s in samples])
    d = EmpiricalDistribution.from_samples([s.statistic for s in samples])
    st = summary(d)
    res = {**cfg.echo(), "statistic": args.statistic, "mean": st["mean"],
           "variance": st["variance"], "ratioToAsymptotic": st["variance"] / target,
           "KS": ks_to_normal(d), "degenerate": d.n < 2}
    out.json("summary.json", res)
    out.csv("histogram.csv", ("binLeft", "binRight", "count", "empiricalDensity", "normalDensity"),
            histogram_rows(d))
    return res, (f"short-intervals {args.statistic} T={cfg.T:g} L={cfg.L:g} "
                 f"var={st['variance']:.4f} KS={st['ks']:.4f}")


def cmd_random_model(args, out: Outputs) -> tuple[dict, str]:
    _need(args, "M", "L", "trials", "seed")
    cfg = randommodel.ModelConfig(int(args.M), float(args.L), int(args.trials), int(args.seed),
                                  int(args.max_moment))
    rep = randommodel.model_moments_mc(cfg)
    out.csv("trials.csv", ("trial", "value"), [(i, float(v)) for i, v in enumerate(rep.samples)])
    res = {**cfg.echo(), **rep.to_dict()}
    out.json("moments.json", res)
    m = ", ".join(f"m{i + 1}={v:.4f}" for i, v in enumerate(rep.estimates))
    return res, f"random-model M={cfg.M} L={cfg.L:g} {m}"


_BESSEL = {
    "j": None,
    "y0": special.bessel_y0,
    "y1": special.bessel_y1,
    "k0": special.bessel_k0,
    "k1": special.bessel_k1,
}


def cmd_bessel_table(args, out: Outputs) -> tuple[dict, str]:
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    xs = np.linspace(args.x_min, args.x_max, args.count)
    if args.fn == "j":
        vals = special.bessel_j(int(args.nu), xs)
        name = f"J_{int(args.nu)}"
    else:
        vals = _BESSEL[args.fn](xs)
        name = args.fn.upper()
    out.csv("bessel.csv", ("x", name), zip(xs.tolist(), np.atleast_1d(vals).tolist()))
    res = {"fn": args.fn, "nu": args.nu, "xMin": args.x_min, "xMax": args.x_max,
           "count": args.count}
    out.json("summary.json", res)
    return res, f"bessel-table {name} on [{args.x_min:g}, {args.x_max:g}] ({args.count} points)"


def _selftest_checks():
    """Small known values; each entry is (name, computed, expected, tolerance)."""
    euler = arith.EULER_GAMMA
    yield "d(12)", float(arith.build_divisor_table(12).values[12]), 6.0, 0.0
    yield "D(10)", float(arith.divisor_summatory(10)), 27.0, 0.0
    yield "Delta(1)", arith.delta(1), 2.0 - 2.0 * euler, 1e-15
    tau = arith.eta24_coefficients(4)
    yield "tau(2)", float(tau[1]), -24.0, 0.0
    yield "tau(3)", float(tau[2]), 252.0, 0.0
    yield "S(1,1;5)", kloosterman.kloosterman_sum(1, 1, 5), 2.0 + 2.0 * math.cos(0.8 * math.pi), 1e-12
    yield "J_1(1)", float(special.bessel_j(1, 1.0)), 0.44005058574493355, 1e-13
    yield "Y_0(1)", float(special.bessel_y0(1.0)), 0.08825696421567696, 1e-13
    yield "K_0(1)", float(special.bessel_k0(1.0)), 0.42102443824070834, 1e-13
    yield "Phi(1)", float(special.normal_cdf(1.0)), 0.8413447460685429, 1e-14
    yield "gaussian m6", randommodel.gaussian_moment(6), 15.0, 0.0
    yield "sigma_M(1, 4)", shortintervals.sigma_sq_M(1, 4.0), 1.0 / math.pi**2, 1e-15
    cfg = progressions.ProgressionConfig(5, 25 / 20)
    yield "S_d(20,5,1)", float(progressions.sharp_progression_values(cfg).sums[0]), 12.0, 0.0
    yield "Kl orthogonality p=7", kloosterman.orthogonality_average(7, 1, 1), 41.0 / 42.0, 1e-12


def cmd_selftest(args, out: Outputs) -> tuple[dict, str]:
    rows = []
    failed = 0
    for name, got, want, tol in _selftest_checks():
        ok = abs(got - want) <= tol
        failed += not ok
        rows.append((name, got, want, tol, "pass" if ok else "FAIL"))
    out.csv("selftest.csv", ("check", "computed", "expected", "tolerance", "status"), rows)
    res = {"checks": len(rows), "failed": failed}
    out.json("summary.json", res)
    line = f"selftest {len(rows) - failed}/{len(rows)} passed"
    if failed:
        raise GateFailure(line)
    return res, line


COMMANDS = {
    "sieve": cmd_sieve,
    "kloosterman": cmd_kloosterman,
    "voronoi-check": cmd_voronoi_check,
    "progressions": cmd_progressions,
    "short-intervals": cmd_short_intervals,
    "random-model": cmd_random_model,
    "bessel-table": cmd_bessel_table,
    "selftest": cmd_selftest,
}
RANDOMIZED = {"short-intervals", "random-model"}


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="runs", help="output directory")
    common.add_argument("--seed", type=int, help="root seed (required by randomized commands)")
    common.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    common.add_argument("--config", help="flat key = value parameter file")
    common.add_argument("--cache-dir", help="directory for binary table caches")

    parser = argparse.ArgumentParser(prog="arithdist", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sieve", parents=[common], help="divisor or weight-12 coefficient table")
    s.add_argument("--N", type=int)
    s.add_argument("--kind", choices=("divisor", "hecke"), default="divisor")
    s.add_argument("--rows", type=int, default=100, help="table rows written to CSV")

    s = sub.add_parser("kloosterman", parents=[common], help="Kl_2(1, b; p) row and checks")
    s.add_argument("--p", type=int)
    s.add_argument("--a", type=int)
    s.add_argument("--b", type=int)

    for name, helptext in (("voronoi-check", "direct versus dual smoothed statistic"),
                           ("progressions", "statistics over residue classes mod p")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--p", type=int)
        s.add_argument("--phi", type=float)
        s.add_argument("--mode", choices=progressions.MODES, default="divisor")
        s.add_argument("--delta", type=float, help="bump window ramp width (smoothed statistic)")
        s.add_argument("--cf", type=float, help="Rankin-Selberg constant (hecke mode)")
        if name == "voronoi-check":
            s.add_argument("--tol", type=float, default=1e-4, help="gate on max |direct - dual|")
            s.add_argument("--dual-tol", type=float, default=1e-5,
                           help="RMS truncation target for the dual sum")

    s = sub.add_parser("short-intervals", parents=[common], help="short-interval experiments")
    s.add_argument("--T", type=float)
    s.add_argument("--L", type=float)
    s.add_argument("--samples", type=int)
    s.add_argument("--mode", choices=shortintervals.MODES, default="divisor")
    s.add_argument("--statistic", choices=("theorem", "increment"), default="theorem")
    s.add_argument("--cf", type=float)

    s = sub.add_parser("random-model", parents=[common], help="Monte-Carlo moments of the model")
    s.add_argument("--M", type=int)
    s.add_argument("--L", type=float)
    s.add_argument("--trials", type=int)
    s.add_argument("--max-moment", type=int, default=6)

    s = sub.add_parser("bessel-table", parents=[common], help="tabulate a Bessel function")
    s.add_argument("--fn", choices=tuple(_BESSEL), default="j")
    s.add_argument("--nu", type=int, default=0)
    s.add_argument("--x-min", type=float, default=0.0)
    s.add_argument("--x-max", type=float, default=10.0)
    s.add_argument("--count", type=int, default=101)

    sub.add_parser("selftest", parents=[common], help="small known-value checks")
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            values = read_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        sub = parser._subparsers._group_actions[0].choices[args.command]
        actions = {a.dest: a for a in sub._actions}
        unknown = sorted(set(values) - set(actions))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        sub.set_defaults(**{k: (actions[k].type or str)(v) for k, v in values.items()})
        args = parser.parse_args(argv)
    return args


def argv_from_manifest(manifest: dict, out=None) -> list[str]:
    """Command line that repeats the run recorded in ``manifest``."""
    argv = [manifest["subcommand"]]
    for key, value in sorted(manifest["parameters"].items()):
        if value is None or key == "config":
            continue
        if key == "out" and out is not None:
            value = out
        argv += ["--" + key.replace("_", "-"), str(value)]
    return argv


def run(argv=None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else list(argv))
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    if args.command in RANDOMIZED and args.seed is None:
        print(f"error: {args.command} requires --seed", file=sys.stderr)
        return EXIT_INVALID
    if args.threads is not None:
        _parallel.set_threads(args.threads)
    if args.cache_dir:
        arith.set_cache_dir(args.cache_dir)

    out = Outputs(args.out)
    status = EXIT_OK
    result, line = {}, ""
    try:
        result, line = COMMANDS[args.command](args, out)
    except GateFailure as exc:
        status, line = EXIT_ACCURACY, str(exc)
    except QuadratureAccuracyError as exc:
        status, line = EXIT_ACCURACY, f"accuracy error: {exc}"
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command",)}
    manifest = {
        "subcommand": args.command,
        "parameters": params,
        "seed": args.seed,
        "threads": _parallel.get_threads(),
        "tableCeilings": {"divisor": arith.DIVISOR_CEILING, "hecke": arith.HECKE_CEILING},
        "toolVersion": tool_version(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "outputs": sorted(out.files),
        "exitCode": status,
    }
    write_json(out.root / "manifest.json", manifest)
    print(line)
    return status


def main() -> int:
    return run()
