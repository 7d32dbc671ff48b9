"""Short-interval increments of Delta(x) and A_f(x).

With F(x) = Delta(x) / x^(1/4) (divisor) or F_f(x) = A_f(x) / x^(1/4) (hecke),
the increment over ``[x, (sqrt x + 1/L)^2]`` is

    S(x, L) = F((sqrt x + 1/L)^2) - F(x),

and its truncated trigonometric model is the M-term sum :func:`short_sum`.
Experiments draw real x uniformly on [T, 2T] and evaluate the increments from
exact summatory functions; the Voronoi-type series is kept as a cross-check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import arith
from ._parallel import chunked_map
from .arith import CapacityError
from .stats import EmpiricalDistribution

MODES = ("divisor", "hecke")
_SQRT2_PI = math.pi * math.sqrt(2.0)


class ConfigError(ValueError):
    """Invalid short-interval configuration."""


@dataclass(frozen=True)
class ShortIntervalConfig:
    """Sampling parameters: x uniform on [T, 2T].

    Attributes
    ----------
    T : float
        Lower end of the sampling range, at least 1e4.
    L : float
        Interval parameter, at least 2. A warning is issued when L > T^0.2.
    samples : int
    seed : int
        Root seed; sample i uses the stream keyed by (seed, i).
    mode : str
        ``"divisor"`` or ``"hecke"``.
    cf_value : float, optional
        Rankin-Selberg constant, required in hecke mode.
    """

    T: float
    L: float
    samples: int
    seed: int
    mode: str = "divisor"
    cf_value: float | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.T >= 1e4:
            raise ConfigError(f"T must be >= 1e4, got {self.T}")
        if not self.L >= 2:
            raise ConfigError(f"L must be >= 2, got {self.L}")
        if self.samples < 0:
            raise ConfigError("samples must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.L > self.T ** 0.2:
            warnings.warn(f"L={self.L} > T^0.2; log L is not small against log T",
                          RuntimeWarning, stacklevel=2)
        if self.mode == "hecke":
            if self.cf_value is None or not self.cf_value > 0:
                raise ConfigError("hecke mode needs a positive cf_value")
            top = _interval_top(2.0 * self.T, self.L)
            if top > arith.HECKE_CEILING:
                raise ConfigError(f"2T + overhang = {top:g} beyond the Hecke ceiling "
                                  f"{arith.HECKE_CEILING}")

    def echo(self) -> dict:
        out = {"T": self.T, "L": self.L, "samples": self.samples, "seed": self.seed,
               "mode": self.mode}
        if self.cf_value is not None:
            out["cf"] = self.cf_value
        return out


@dataclass(frozen=True)
class ShortIntervalSample:
    x: float
    statistic: float


def _interval_top(x: float, L: float) -> float:
    return (math.sqrt(x) + 1.0 / L) ** 2


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")


def _coefficients(n_max: int, mode: str) -> np.ndarray:
    """tau(n) as floats for 0 <= n <= n_max."""
    if mode == "divisor":
        return arith.divisor_table(max(n_max, 1)).values[:n_max + 1].astype(float)
    table = arith.hecke_table()
    if n_max > table.limit:
        raise CapacityError(f"need rho(n) up to {n_max}, table has {table.limit}")
    return table.normalized[:n_max + 1]


def _summatory(x: float, mode: str) -> float:
    """Delta(x) or A_f(x)."""
    if mode == "divisor":
        return arith.delta(x)
    return arith.hecke_summatory(arith.hecke_table(), x)


def _increment(x: float, y: float, mode: str) -> float:
    """Delta(y) - Delta(x) (or A_f) for x <= y, free of main-term cancellation."""
    if mode == "divisor":
        count = arith.divisor_summatory(y) - arith.divisor_summatory(x)
        return float(count) - arith.main_term_increment(x, y - x)
    table = arith.hecke_table()
    return arith.hecke_summatory(table, y) - arith.hecke_summatory(table, x)


# ---------------------------------------------------------------------------
# series and exact values


def remainder_series(x: float, N: int, mode: str = "divisor") -> float:
    """N-term Voronoi-type approximation to F(x) (or F_f(x)).

    ``(1/(pi sqrt 2)) sum_{n<=N} tau(n) n^(-3/4) cos(4 pi sqrt(n x) - pi/4)``.
    """
    _check_mode(mode)
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    if x <= 0:
        raise ValueError("x must be positive")
    tau = _coefficients(N, mode)[1:]
    n = np.arange(1, N + 1, dtype=float)
    rn = np.sqrt(n)
    terms = tau * n ** -0.75 * np.cos(4.0 * math.pi * rn * math.sqrt(x) - 0.25 * math.pi)
    return float(np.add.reduce(terms)) / _SQRT2_PI


def F(x: float, mode: str = "divisor") -> float:
    """Delta(x) / x^(1/4) or A_f(x) / x^(1/4), from exact sums."""
    _check_mode(mode)
    return _summatory(x, mode) / x ** 0.25


def short_stat_exact(x: float, L: float, mode: str = "divisor") -> float:
    """S(x, L) = F((sqrt x + 1/L)^2) - F(x) from exact summatory functions."""
    _check_mode(mode)
    if x < 1:
        raise ValueError("x must be >= 1")
    if mode == "divisor" and L < 2:
        raise ValueError("L must be >= 2")
    if L <= 0:
        raise ValueError("L must be positive")
    y = _interval_top(x, L)
    if mode == "divisor":
        # F(y) - F(x) = (Delta(y) - Delta(x)) / y^(1/4) + Delta(x) (y^-1/4 - x^-1/4)
        inc = _increment(x, y, mode)
        return inc / y ** 0.25 + arith.delta(x) * (y ** -0.25 - x ** -0.25)
    return F(y, mode) - F(x, mode)


def short_sum(x: float, L: float, M: int, mode: str = "divisor") -> float:
    """S(x, L, M), the M-term trigonometric model of S(x, L).

    ``-(2/(pi sqrt 2)) sum_{n<=M} tau(n) n^(-3/4) sin(2 pi sqrt(n)/L)
    sin(4 pi sqrt(n) (sqrt x + 1/(2L)) - pi/4)``.
    """
    _check_mode(mode)
    M = int(M)
    if M < 1:
        raise ValueError("M must be >= 1")
    tau = _coefficients(M, mode)[1:]
    rn = np.sqrt(np.arange(1, M + 1, dtype=float))
    s = math.sqrt(x) + 0.5 / L
    terms = (tau * rn ** -1.5 * np.sin(2.0 * math.pi * rn / L)
             * np.sin(4.0 * math.pi * rn * s - 0.25 * math.pi))
    return -2.0 * float(np.add.reduce(terms)) / _SQRT2_PI


def sigma_sq_M(M: int, L: float, mode: str = "divisor") -> float:
    """(1/pi^2) sum_{n<=M} tau(n)^2 n^(-3/2) sin^2(2 pi sqrt(n)/L)."""
    _check_mode(mode)
    M = int(M)
    if M < 1:
        raise ValueError("M must be >= 1")
    tau = _coefficients(M, mode)[1:]
    n = np.arange(1, M + 1, dtype=float)
    terms = tau * tau * n ** -1.5 * np.sin(2.0 * math.pi * np.sqrt(n) / L) ** 2
    return float(np.add.reduce(terms)) / math.pi**2


def sigma_sq_asymptotic(L: float, mode: str = "divisor", cf_value: float | None = None) -> float:
    """(16/pi^2) log^3 L / L (divisor) or 2 c_f / L (hecke)."""
    _check_mode(mode)
    if not L > 1:
        raise ValueError("L must exceed 1")
    if mode == "divisor":
        return 16.0 / math.pi**2 * math.log(L) ** 3 / L
    if cf_value is None:
        raise ConfigError("hecke mode needs cf_value")
    return 2.0 * cf_value / L


def theorem_statistic(x: float, L: float, mode: str = "divisor",
                      cf_value: float | None = None) -> float:
    """Normalised increment over [x, x + sqrt(x)/L].

    Divisor: ``(Delta(x + sqrt x / L) - Delta(x)) / (x^(1/4) sqrt((8/pi^2) log^3 L / L))``;
    hecke: ``(A_f(x + sqrt x / L) - A_f(x)) / (x^(1/4) sqrt(c_f / L))``.
    """
    _check_mode(mode)
    if x < 1:
        raise ValueError("x must be >= 1")
    if not L > 1:
        raise ValueError("L must exceed 1")
    h = math.sqrt(x) / L
    inc = _increment(x, x + h, mode)
    if mode == "divisor":
        norm = math.sqrt(8.0 / math.pi**2 * math.log(L) ** 3 / L)
    else:
        if cf_value is None:
            raise ConfigError("hecke mode needs cf_value")
        norm = math.sqrt(cf_value / L)
    return inc / (x ** 0.25 * norm)


# ---------------------------------------------------------------------------
# experiments


def sample_points(cfg: ShortIntervalConfig) -> np.ndarray:
    """x_i uniform on [T, 2T], sample i drawn from the Philox stream (seed, i)."""
    out = np.empty(cfg.samples)
    for i in range(cfg.samples):
        gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, i])))
        out[i] = cfg.T * (1.0 + gen.random())
    return out


def _evaluate(cfg: ShortIntervalConfig, kind: str, threads: int | None) -> list[ShortIntervalSample]:
    xs = sample_points(cfg)
    if kind == "increment":
        def one(x):
            return short_stat_exact(x, cfg.L, cfg.mode)
    else:
        def one(x):
            return theorem_statistic(x, cfg.L, cfg.mode, cfg.cf_value)
    vals = chunked_map(lambda chunk: [one(x) for x in chunk], xs.tolist(), threads=threads)
    return [ShortIntervalSample(float(x), float(v)) for x, v in zip(xs, vals)]


def increment_samples(cfg: ShortIntervalConfig, threads: int | None = None):
    """(x, S(x, L)) pairs for the configured sample points."""
    return _evaluate(cfg, "increment", threads)


def theorem_samples(cfg: ShortIntervalConfig, threads: int | None = None):
    """(x, theorem_statistic(x, L)) pairs for the configured sample points."""
    return _evaluate(cfg, "theorem", threads)


@dataclass
class VarianceReport:
    """Sample variance of S(x, L) and its ratio to the asymptotic variance."""

    sample_variance: float
    ratio_to_asymptotic: float
    degenerate: bool
    samples: list = field(default_factory=list, repr=False)


def variance_experiment(cfg: ShortIntervalConfig, threads: int | None = None) -> VarianceReport:
    """Variance of S(x, L) over x uniform on [T, 2T].

    A single sample gives variance 0 and ``degenerate=True``.
    """
    samples = increment_samples(cfg, threads)
    if not samples:
        raise ConfigError("variance needs at least one sample")
    d = EmpiricalDistribution.from_samples([s.statistic for s in samples])
    var = d.variance()
    ratio = var / sigma_sq_asymptotic(cfg.L, cfg.mode, cfg.cf_value)
    return VarianceReport(var, ratio, d.n < 2, samples)


def distribution_experiment(cfg: ShortIntervalConfig, threads: int | None = None) -> EmpiricalDistribution:
    """Empirical distribution of :func:`theorem_statistic` at the sample points."""
    return EmpiricalDistribution.from_samples([s.statistic for s in theorem_samples(cfg, threads)])
