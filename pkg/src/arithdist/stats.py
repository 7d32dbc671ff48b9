"""Empirical distributions: KS distance to N(0, 1), raw moments, histograms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .special import normal_cdf


class EmptyDistributionError(ValueError):
    """A distribution needs at least one sample."""


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted sample set.

    Build with :meth:`from_samples`; the constructor expects sorted data.
    """

    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.samples.size == 0:
            raise EmptyDistributionError("empty distribution")

    @classmethod
    def from_samples(cls, xs) -> "EmpiricalDistribution":
        arr = np.sort(np.asarray(xs, dtype=float).ravel(), kind="stable")
        if arr.size == 0:
            raise EmptyDistributionError("empty distribution")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        return cls(arr)

    @property
    def n(self) -> int:
        return int(self.samples.size)

    def mean(self) -> float:
        return sample_moments(self, 1)[0]

    def variance(self) -> float:
        """Population variance (1/n normalisation)."""
        m1, m2 = sample_moments(self, 2)
        return _pairwise((self.samples - m1) ** 2) / self.n if self.n > 1 else 0.0


def _pairwise(x: np.ndarray) -> float:
    # numpy's add.reduce is pairwise for contiguous float arrays
    return float(np.add.reduce(np.ascontiguousarray(x, dtype=float)))


def ks_to_normal(d: EmpiricalDistribution) -> float:
    """Kolmogorov-Smirnov distance sup |F_n - Phi|."""
    n = d.n
    cdf = normal_cdf(d.samples)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def ks_two_sample(d1: EmpiricalDistribution, d2: EmpiricalDistribution) -> float:
    """sup |F_1 - F_2| over the pooled sample points."""
    pts = np.concatenate([d1.samples, d2.samples])
    f1 = np.searchsorted(d1.samples, pts, side="right") / d1.n
    f2 = np.searchsorted(d2.samples, pts, side="right") / d2.n
    return float(np.max(np.abs(f1 - f2)))


def sample_moments(d: EmpiricalDistribution, max_m: int) -> list[float]:
    """Raw moments (1/n) sum x^m for m = 1..max_m, pairwise summation."""
    out = []
    p = np.ones_like(d.samples)
    for _ in range(max_m):
        p = p * d.samples
        out.append(_pairwise(p) / d.n)
    return out


def freedman_diaconis_edges(d: EmpiricalDistribution) -> np.ndarray:
    """Bin edges with width 2 IQR / n^(1/3) (one bin when IQR is 0)."""
    q1, q3 = np.percentile(d.samples, [25.0, 75.0])
    lo, hi = float(d.samples[0]), float(d.samples[-1])
    width = 2.0 * (q3 - q1) / d.n ** (1.0 / 3.0)
    if width <= 0 or hi <= lo:
        return np.array([lo - 0.5, hi + 0.5]) if hi <= lo else np.array([lo, hi])
    nbins = max(1, math.ceil((hi - lo) / width))
    return lo + width * np.arange(nbins + 1)


def histogram_rows(d: EmpiricalDistribution):
    """Rows (binLeft, binRight, count, empiricalDensity, normalDensity)."""
    edges = freedman_diaconis_edges(d)
    counts, _ = np.histogram(d.samples, bins=edges)
    rows = []
    for lo, hi, c in zip(edges[:-1], edges[1:], counts):
        w = hi - lo
        normal = (normal_cdf(hi) - normal_cdf(lo)) / w
        rows.append((float(lo), float(hi), int(c), float(c / (d.n * w)), float(normal)))
    return rows


def summary(d: EmpiricalDistribution) -> dict:
    return {"n": d.n, "mean": d.mean(), "variance": d.variance(), "ks": ks_to_normal(d)}
