"""Random model for the short-interval sums.

Each n <= M is written uniquely as n = q f^2 with q square-free. Independent
phases theta_q, uniform on [0, 1), stand in for the values of f sqrt(x) mod 1,
and the model sum is

    (1/sigma_M) sum_q Im Y(q),
    Im Y(q) = -(2/(pi sqrt 2)) sum_f d(n) n^(-3/4) sin(2 pi sqrt(n)/L)
              sin(2 pi (sqrt(n)/L - 1/8 + f theta_q)),

whose variance is exactly 1 by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import arith
from ._parallel import chunked_map
from .shortintervals import sigma_sq_M

MAX_MOMENT = 20
# trials per vectorised batch; part of the determinism contract only through
# the per-trial streams, never through the batch size
BATCH = 64


class DomainError(ValueError):
    """Parameter outside the supported range."""


@dataclass(frozen=True)
class ModelConfig:
    """Monte-Carlo parameters for the random model.

    Attributes
    ----------
    M : int
        Truncation, n = q f^2 <= M.
    L : float
        Interval parameter, at least 2.
    trials : int
    seed : int
    max_moment : int
    """

    M: int
    L: float
    trials: int
    seed: int
    max_moment: int = 6

    def __post_init__(self):
        if self.M < 1:
            raise DomainError("M must be >= 1")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if not self.L >= 2:
            raise DomainError(f"L must be >= 2, got {self.L}")
        if not 1 <= self.max_moment <= MAX_MOMENT:
            raise DomainError(f"max_moment must lie in [1, {MAX_MOMENT}]")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    def echo(self) -> dict:
        return {"M": self.M, "L": self.L, "trials": self.trials, "seed": self.seed,
                "maxMoment": self.max_moment}


@dataclass
class MomentReport:
    """Raw moments m = 1..max_moment of the normalised model sum.

    ``standard_errors`` is None when a single trial makes them unavailable.
    """

    estimates: list
    standard_errors: list | None
    gaussian_targets: list
    trials: int
    samples: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "estimates": self.estimates,
            "standardErrors": self.standard_errors,
            "standardErrorsAvailable": self.standard_errors is not None,
            "gaussianTargets": self.gaussian_targets,
            "trials": self.trials,
        }


def squarefree_sieve(M: int) -> np.ndarray:
    """Square-free q <= M, ascending."""
    M = int(M)
    if M < 1:
        raise DomainError("M must be >= 1")
    if M > arith.DIVISOR_CEILING:
        raise arith.CapacityError(f"M={M} beyond {arith.DIVISOR_CEILING}")
    ok = np.ones(M + 1, dtype=bool)
    ok[0] = False
    for k in range(2, math.isqrt(M) + 1):
        ok[k * k::k * k] = False
    return np.flatnonzero(ok)


def _squarefree_part(M: int) -> tuple[np.ndarray, np.ndarray]:
    """(q, f) with n = q f^2, q square-free, for n = 1..M."""
    q = np.zeros(M + 1, dtype=np.int64)
    f = np.zeros(M + 1, dtype=np.int64)
    for s in squarefree_sieve(M):
        ff = np.arange(1, math.isqrt(M // s) + 1, dtype=np.int64)
        n = s * ff * ff
        q[n] = s
        f[n] = ff
    return q[1:], f[1:]


@dataclass(frozen=True)
class ModelTerms:
    """Per-n data of the model: n = q f^2 with amplitude and phase offset."""

    M: int
    L: float
    squarefree: np.ndarray
    q_index: np.ndarray
    f: np.ndarray
    amplitude: np.ndarray
    offset: np.ndarray
    sigma: float


@lru_cache(maxsize=8)
def model_terms(M: int, L: float) -> ModelTerms:
    M = int(M)
    q, f = _squarefree_part(M)
    sq = squarefree_sieve(M)
    q_index = np.searchsorted(sq, q)
    d = arith.divisor_table(M).values[1:M + 1].astype(float)
    rn = np.sqrt(np.arange(1, M + 1, dtype=float))
    amp = -2.0 / (math.pi * math.sqrt(2.0)) * d * rn ** -1.5 * np.sin(2.0 * math.pi * rn / L)
    offset = rn / L - 0.125
    return ModelTerms(M, float(L), sq, q_index, f, amp, offset, math.sqrt(sigma_sq_M(M, L)))


def trial_phases(cfg: ModelConfig, trial: int) -> np.ndarray:
    """theta_q for every square-free q <= M, from the Philox stream (seed, trial)."""
    nq = model_terms(cfg.M, cfg.L).squarefree.size
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, int(trial)])))
    return gen.random(nq)


def _im_terms(terms: ModelTerms, theta: np.ndarray) -> np.ndarray:
    phase = terms.offset + terms.f * theta[..., terms.q_index]
    return terms.amplitude * np.sin(2.0 * math.pi * phase)


def model_components(cfg: ModelConfig, trial: int, theta=None) -> np.ndarray:
    """Im Y(q) for each square-free q <= M (unnormalised)."""
    terms = model_terms(cfg.M, cfg.L)
    th = trial_phases(cfg, trial) if theta is None else np.asarray(theta, dtype=float)
    return np.bincount(terms.q_index, weights=_im_terms(terms, th),
                       minlength=terms.squarefree.size)


def sample_model_sum(cfg: ModelConfig, trial: int, theta=None) -> float:
    """(1/sigma_M) sum_q Im Y(q) for one trial.

    ``theta`` overrides the drawn phases (array over the square-free q, or a
    scalar applied to all q).
    """
    terms = model_terms(cfg.M, cfg.L)
    if theta is None:
        th = trial_phases(cfg, trial)
    else:
        th = np.broadcast_to(np.asarray(theta, dtype=float), terms.squarefree.shape)
    if terms.sigma == 0.0:
        return 0.0
    return float(np.add.reduce(_im_terms(terms, th))) / terms.sigma


def model_samples(cfg: ModelConfig, threads: int | None = None) -> np.ndarray:
    """Normalised model sums for trials 0..trials-1."""
    terms = model_terms(cfg.M, cfg.L)

    def run(chunk):
        th = np.stack([trial_phases(cfg, t) for t in chunk])
        im = _im_terms(terms, th)
        # row sums in a fixed order, independent of the chunking
        return [float(np.add.reduce(row)) for row in im]

    sums = np.array(chunked_map(run, range(cfg.trials), chunk=BATCH, threads=threads))
    if terms.sigma == 0.0:
        return np.zeros_like(sums)
    return sums / terms.sigma


def gaussian_moment(m: int) -> float:
    """m! / (2^(m/2) (m/2)!) for even m, 0 for odd m, m <= 20."""
    m = int(m)
    if m < 0 or m > MAX_MOMENT:
        raise DomainError(f"moment order must lie in [0, {MAX_MOMENT}], got {m}")
    if m % 2:
        return 0.0
    return float(math.factorial(m) // (2 ** (m // 2) * math.factorial(m // 2)))


def model_moments_mc(cfg: ModelConfig, threads: int | None = None) -> MomentReport:
    """Monte-Carlo raw moments of the normalised model sum with standard errors."""
    x = model_samples(cfg, threads)
    est, se = [], []
    p = np.ones_like(x)
    for _ in range(cfg.max_moment):
        p = p * x
        mean = float(np.add.reduce(p)) / x.size
        est.append(mean)
        if x.size > 1:
            var = float(np.add.reduce((p - mean) ** 2)) / (x.size - 1)
            se.append(math.sqrt(var / x.size))
    targets = [gaussian_moment(m) for m in range(1, cfg.max_moment + 1)]
    return MomentReport(est, se if x.size > 1 else None, targets, cfg.trials, x)
