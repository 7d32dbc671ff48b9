"""Coefficient sums in residue classes mod p: sharp, smoothed and dual forms.

For a prime p and X = p^2 / Phi the statistic is

    E(a) = (S(a) - M) / sigma,

with S(a) the sum of d(n) (divisor mode) or rho(n) (hecke mode) over
n <= X, n = a mod p, either sharply cut or weighted by w(n/X). The smoothed
statistic also has a dual expression as a sum over all n != 0 of
tau(n) B(w)(n/Y) Kl_2(a, n; p), Y = Phi, evaluated in
:func:`voronoi_dual_values`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import arith
from .arith import EULER_GAMMA, CapacityError
from .kloosterman import is_prime, kl2_table
from .special import QuadratureAccuracyError, adaptive_quad
from .stats import EmpiricalDistribution
from .windows import TransformInterpolant, WindowSpec, window_eval, window_l2_norm

MODES = ("divisor", "hecke")
# dual sums stop at this many terms per sign (divisor mode)
DUAL_TERM_BUDGET = 20_000_000
# exp(-90) is far below any tolerance of interest
K_TAIL_EXPONENT = 90.0


class ConfigError(ValueError):
    """Invalid progression configuration."""


@dataclass(frozen=True)
class ProgressionConfig:
    """Parameters of one progression experiment.

    Attributes
    ----------
    p : int
        Prime modulus.
    phi : float
        X = p^2 / phi; also the dual length Y.
    mode : str
        ``"divisor"`` or ``"hecke"``.
    window : WindowSpec, optional
        Needed by the smoothed and dual statistics.
    cf_value : float, optional
        Rankin-Selberg constant for hecke mode (see ``arith.estimate_cf``).
    """

    p: int
    phi: float
    mode: str = "divisor"
    window: WindowSpec | None = None
    cf_value: float | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not is_prime(self.p):
            raise ConfigError(f"p={self.p} is not prime")
        if not self.phi >= 1:
            raise ConfigError(f"phi must be >= 1, got {self.phi}")
        if self.X < self.p:
            raise ConfigError(f"X = p^2/phi = {self.X:g} < p leaves residue classes empty")
        if self.mode == "hecke":
            if self.cf_value is None or not self.cf_value > 0:
                raise ConfigError("hecke mode needs a positive cf_value")
            if self.X > arith.HECKE_CEILING:
                raise ConfigError(f"X = {self.X:g} beyond the Hecke ceiling {arith.HECKE_CEILING}")

    @property
    def X(self) -> float:
        return self.p * self.p / self.phi

    @property
    def Y(self) -> float:
        return float(self.phi)

    def echo(self) -> dict:
        out = {"p": self.p, "phi": self.phi, "X": self.X, "mode": self.mode}
        if self.window is not None:
            out["delta"] = self.window.delta
        if self.cf_value is not None:
            out["cf"] = self.cf_value
        return out


@dataclass
class ProgressionResult:
    """E(a) for a = 1..p-1 together with the pieces that produced it."""

    values: np.ndarray
    sums: np.ndarray
    mean_term: float
    normalization: float
    config: ProgressionConfig
    smoothed: bool = False
    notes: dict = field(default_factory=dict)

    @property
    def residues(self) -> np.ndarray:
        return np.arange(1, self.config.p)


def _coefficients(cfg: ProgressionConfig, n_max: int):
    """tau(n) for 0 <= n <= n_max (index 0 unused)."""
    if cfg.mode == "divisor":
        return arith.divisor_table(max(n_max, 1)).values[:n_max + 1]
    table = arith.hecke_table()
    if n_max > table.limit:
        raise CapacityError(f"need rho(n) up to {n_max}, table has {table.limit}")
    return table.normalized[:n_max + 1]


def _residue_sums(weights: np.ndarray, p: int) -> np.ndarray:
    """Sum of weights[n] over n = r mod p, r = 0..p-1 (fixed reduction order)."""
    n = weights.size
    padded = np.zeros(-(-n // p) * p, dtype=weights.dtype)
    padded[:n] = weights
    return padded.reshape(-1, p).sum(axis=0)


def sharp_progression_values(cfg: ProgressionConfig) -> ProgressionResult:
    """Sharp E(X, p, a) for a = 1..p-1.

    Divisor mode uses exact integer class sums and the mean term
    ``(1/p) D(X) - (X/p^2)(log X - 1 + 2 gamma - 2 log p)`` with
    normalisation ``sqrt((2/pi^2)(X/p) log^3(p^2/X + 2))``; hecke mode uses
    ``(1/p) A_f(X)`` and ``sqrt(c_f X / p)``.
    """
    p, X = cfg.p, cfg.X
    n_max = int(math.floor(X))
    tau = _coefficients(cfg, n_max)
    if cfg.mode == "divisor":
        sums = _residue_sums(tau.astype(np.int64), p)
        total = int(sums.sum())
        mean = total / p - (X / p**2) * (math.log(X) - 1.0 + 2.0 * EULER_GAMMA - 2.0 * math.log(p))
        norm = math.sqrt(2.0 / math.pi**2 * (X / p) * math.log(p * p / X + 2.0) ** 3)
        s = sums[1:].astype(float)
    else:
        sums = _residue_sums(np.asarray(tau, dtype=float), p)
        mean = math.fsum(sums.tolist()) / p
        norm = math.sqrt(cfg.cf_value * X / p)
        s = sums[1:]
    return ProgressionResult((s - mean) / norm, sums[1:], mean, norm, cfg)


def _log_moment(cfg: ProgressionConfig, spec: WindowSpec) -> float:
    """(1/p^2) int_0^inf (log y + 2 gamma - 2 log p) w(y/X) dy."""
    X, p = cfg.X, cfg.p
    c = math.log(X) + 2.0 * EULER_GAMMA - 2.0 * math.log(p)
    r = adaptive_quad(lambda u: (np.log(u) + c) * window_eval(spec, u), spec.delta, 1.0,
                      tol=1e-14, breakpoints=spec.breakpoints())
    return X * r.value / p**2


def smoothed_progression_values(cfg: ProgressionConfig) -> ProgressionResult:
    """Smoothed E(X, p, a; w) for a = 1..p-1.

    Hecke mode takes the mean term ``(1/p) sum rho(n) w(n/X)`` (no
    secondary integral term, cusp forms having no main term).
    """
    if cfg.window is None:
        raise ConfigError("smoothed statistic needs a window")
    spec = cfg.window
    p, X = cfg.p, cfg.X
    n_max = int(math.floor(X))
    tau = np.asarray(_coefficients(cfg, n_max), dtype=float)
    n = np.arange(n_max + 1, dtype=float)
    weights = tau * window_eval(spec, n / X)
    weights[0] = 0.0
    sums = _residue_sums(weights, p)
    total = math.fsum(sums.tolist())
    wnorm = window_l2_norm(spec)
    if cfg.mode == "divisor":
        mean = total / p - _log_moment(cfg, spec)
        norm = wnorm * math.sqrt(2.0 / math.pi**2 * (X / p) * math.log(p * p / X + 2.0) ** 3)
    else:
        mean = total / p
        norm = wnorm * math.sqrt(cfg.cf_value * X / p)
    res = ProgressionResult((sums[1:] - mean) / norm, sums[1:], mean, norm, cfg, smoothed=True)
    if cfg.mode == "hecke":
        res.notes["hecke_mean_term"] = "(1/p) sum rho(n) w(n/X)"
    return res


# ---------------------------------------------------------------------------
# dual side


@dataclass
class DualResult:
    """Dual-sum values of E(a; w), a = 1..p-1, with truncation diagnostics.

    ``tail_bound`` is an envelope bound on |omitted terms| (Weil bound on
    Kl_2, |tau(n)| <= d(n), decay constant calibrated on the last octave);
    ``rms_estimate`` is the root-mean-square size of the omitted part over a
    implied by Kloosterman orthogonality.
    """

    values: np.ndarray
    tail_bound: float
    rms_estimate: float
    xi_max: float
    terms: int
    normalization: float


def _dual_sigma(cfg: ProgressionConfig, spec: WindowSpec) -> float:
    Y = cfg.Y
    wn = window_l2_norm(spec)
    if cfg.mode == "divisor":
        return wn * math.sqrt(2.0 / math.pi**2 * Y * math.log(Y + 2.0) ** 3)
    return wn * math.sqrt(cfg.cf_value * Y)


def _tail_integral(n0: float, alpha: float) -> float:
    """int_n0^inf (log t + 2 gamma) t^-alpha dt for alpha > 1."""
    a1 = alpha - 1.0
    lg = math.log(n0)
    return n0 ** -a1 * (lg / a1 + 1.0 / a1**2 + 2.0 * EULER_GAMMA / a1)


def _square_density_tail(n0: float, beta: float, mode: str, cf: float | None) -> float:
    """int_n0^inf rho2(t) t^-beta dt, rho2 the mean density of tau(n)^2."""
    if mode == "hecke":
        return cf * n0 ** (1.0 - beta) / (beta - 1.0)
    # density of sum d(n)^2 ~ (1/pi^2) t log^3 t is (1/pi^2)(log^3 t + 3 log^2 t)
    u = np.linspace(math.log(n0), math.log(n0) + 60.0 / (beta - 1.0), 4001)
    f = (u**3 + 3.0 * u**2) / math.pi**2 * np.exp((1.0 - beta) * u)
    return float(np.trapezoid(f, u))


def _tail_estimates(interp: TransformInterpolant, cfg: ProgressionConfig, xi_max: float,
                    sigma: float) -> tuple[float, float]:
    Y = cfg.Y
    n0 = Y * xi_max
    bound = math.inf
    rms = math.inf
    for A in range(1, 9):
        alpha = 0.5 * A + 0.25
        if alpha <= 1.0:
            continue
        c = interp.envelope_constant(A, 0.5 * xi_max, xi_max)
        tail_abs = _tail_integral(n0, alpha)
        bound = min(bound, 2.0 * c * Y**alpha * tail_abs / sigma)
        tail_sq = _square_density_tail(n0, 2.0 * alpha, cfg.mode, cfg.cf_value)
        rms = min(rms, c * Y**alpha * math.sqrt(tail_sq) / sigma)
    return bound, rms


def voronoi_dual_values(cfg: ProgressionConfig, tol: float = 1e-5,
                        interp: TransformInterpolant | None = None) -> DualResult:
    """E(a; w) for all a from the dual sum over n != 0.

    The cut-off |n| <= Y xi_max doubles xi_max from 64 until the RMS tail
    estimate is at most ``tol``; the envelope ``tail_bound`` is reported
    alongside.

    Raises
    ------
    QuadratureAccuracyError
        If ``tol`` is not reached within the term budget (divisor mode) or
        the coefficient table (hecke mode).
    """
    if cfg.window is None:
        raise ConfigError("dual evaluation needs a window")
    spec = cfg.window
    if cfg.Y <= 2:
        raise ConfigError("dual evaluation needs Y = phi > 2")
    kind = "d" if cfg.mode == "divisor" else "f"
    sigma = _dual_sigma(cfg, spec)
    Y, p = cfg.Y, cfg.p
    if cfg.mode == "divisor":
        n_cap = DUAL_TERM_BUDGET
    else:
        n_cap = arith.hecke_table().limit
    xi_cap = n_cap / Y

    xi_max = 64.0
    if interp is None:
        interp = TransformInterpolant(spec, kind, xi_max)
    while True:
        xi_max = min(xi_max, xi_cap)
        interp.extend(xi_max)
        bound, rms = _tail_estimates(interp, cfg, xi_max, sigma)
        if rms <= tol:
            break
        if xi_max >= xi_cap:
            raise QuadratureAccuracyError(
                f"dual tail estimate {rms:.3g} > tol {tol:.3g} at the term cap {n_cap}",
                (xi_max, bound, rms))
        xi_max *= 2.0

    n_pos = int(math.floor(Y * xi_max))
    tau = np.asarray(_coefficients(cfg, n_pos), dtype=float)
    n = np.arange(1, n_pos + 1, dtype=float)
    pos = np.zeros(n_pos + 1)
    pos[1:] = tau[1:] * interp(n / Y)
    c_pos = _residue_sums(pos, p)

    table = kl2_table(p)
    a = np.arange(1, p, dtype=np.int64)
    r = np.arange(p, dtype=np.int64)
    kl_pos = table[(a[:, None] * r[None, :]) % p]
    total = (kl_pos * c_pos[None, :]).sum(axis=1)
    terms = n_pos

    if cfg.mode == "divisor":
        # K_1 decay: beyond xi_neg the negative half is below exp(-90)
        xi_neg = min(xi_max, (K_TAIL_EXPONENT / (4.0 * math.pi * math.sqrt(spec.delta))) ** 2)
        n_neg = int(math.floor(Y * xi_neg))
        m = np.arange(1, n_neg + 1, dtype=float)
        neg = np.zeros(n_neg + 1)
        neg[1:] = tau[1:n_neg + 1] * interp(-m / Y)
        c_neg = _residue_sums(neg, p)
        kl_neg = table[(-a[:, None] * r[None, :]) % p]
        total = total + (kl_neg * c_neg[None, :]).sum(axis=1)
        terms += n_neg

    # S - M = (sqrt p / Y) * dual sum and sigma_direct * Y / sqrt p = sigma
    values = total / sigma
    return DualResult(values, bound, rms, xi_max, terms, sigma)


@dataclass(frozen=True)
class DualValue:
    a: int
    value: float
    tail_bound: float
    rms_estimate: float


def voronoi_dual_eval(cfg: ProgressionConfig, a: int, tol: float = 1e-5) -> DualValue:
    """Dual-sum value of E(a; w) for a single residue."""
    if a % cfg.p == 0:
        raise ConfigError("a must be a unit mod p")
    res = voronoi_dual_values(cfg, tol)
    return DualValue(int(a % cfg.p), float(res.values[a % cfg.p - 1]), res.tail_bound,
                     res.rms_estimate)


# ---------------------------------------------------------------------------
# sharp versus smooth


def delta_rule(p: int, X: float) -> float:
    """delta = (p/X)^(1/2) (pX)^(-0.01)."""
    return math.sqrt(p / X) * (p * X) ** -0.01


def sharp_smooth_gap(cfg: ProgressionConfig, delta: float) -> float:
    """Mean over a of |E_sharp(a) - E(a; w_delta)|.

    Raises
    ------
    ConfigError
        If ``2p/X > delta``.
    """
    if 2.0 * cfg.p / cfg.X > delta:
        raise ConfigError(f"need 2p/X <= delta, got 2p/X = {2 * cfg.p / cfg.X:.4g} > {delta}")
    sharp = sharp_progression_values(cfg)
    smooth_cfg = ProgressionConfig(cfg.p, cfg.phi, cfg.mode, WindowSpec(delta), cfg.cf_value)
    smooth = smoothed_progression_values(smooth_cfg)
    return float(np.mean(np.abs(sharp.values - smooth.values)))


def progression_experiment(cfg: ProgressionConfig) -> EmpiricalDistribution:
    """Empirical distribution of the sharp E(a), a = 1..p-1."""
    return EmpiricalDistribution.from_samples(sharp_progression_values(cfg).values)
