import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import norm

from arithdist.stats import (
    EmpiricalDistribution,
    EmptyDistributionError,
    freedman_diaconis_edges,
    histogram_rows,
    ks_to_normal,
    ks_two_sample,
    sample_moments,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_ideal_quantiles():
    n = 100
    q = norm.ppf((np.arange(1, n + 1) - 0.5) / n)
    assert ks_to_normal(EmpiricalDistribution.from_samples(q)) <= 0.5 / n + 1e-6


def test_single_sample():
    assert ks_to_normal(EmpiricalDistribution.from_samples([0.0])) == pytest.approx(0.5)


def test_seeded_normal_draws():
    x = np.random.default_rng(20241017).standard_normal(10_000)
    assert ks_to_normal(EmpiricalDistribution.from_samples(x)) <= 1.63 / 100


def test_moments_small_sets():
    assert sample_moments(EmpiricalDistribution.from_samples([-1.0, 1.0]), 4) == [0.0, 1.0, 0.0, 1.0]
    assert sample_moments(EmpiricalDistribution.from_samples([0.0]), 3) == [0.0, 0.0, 0.0]


def test_moments_seeded_normal():
    d = EmpiricalDistribution.from_samples(np.random.default_rng(7).standard_normal(100_000))
    m = sample_moments(d, 4)
    assert 0.98 <= m[1] <= 1.02
    assert 2.9 <= m[3] <= 3.1


def test_moments_against_extended_precision():
    from fractions import Fraction
    x = np.random.default_rng(3).standard_normal(20_000) * 1e3 + 1e4
    d = EmpiricalDistribution.from_samples(x)
    exact = float(sum(Fraction(v) ** 2 for v in x.tolist()) / len(x))
    assert sample_moments(d, 2)[1] == pytest.approx(exact, rel=1e-12)


def test_empty_and_nonfinite():
    with pytest.raises(EmptyDistributionError):
        EmpiricalDistribution.from_samples([])
    with pytest.raises(ValueError):
        EmpiricalDistribution.from_samples([1.0, float("nan")])


@given(st.lists(finite, min_size=1, max_size=200), st.randoms())
def test_ks_permutation_invariant(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    a = ks_to_normal(EmpiricalDistribution.from_samples(xs))
    b = ks_to_normal(EmpiricalDistribution.from_samples(ys))
    assert a == b
    assert 0.0 <= a <= 1.0


@given(st.lists(finite, min_size=1, max_size=100))
def test_ks_two_sample_self_is_zero(xs):
    d = EmpiricalDistribution.from_samples(xs)
    assert ks_two_sample(d, d) == 0.0


def test_ks_matches_scipy():
    from scipy.stats import kstest
    x = np.random.default_rng(11).standard_normal(500) * 1.1
    want = kstest(x, "norm").statistic
    assert ks_to_normal(EmpiricalDistribution.from_samples(x)) == pytest.approx(want, abs=1e-14)


def test_histogram_rows_cover_samples():
    d = EmpiricalDistribution.from_samples(np.random.default_rng(2).standard_normal(5000))
    rows = histogram_rows(d)
    assert sum(r[2] for r in rows) == d.n
    width = rows[0][1] - rows[0][0]
    assert sum(r[3] * width for r in rows) == pytest.approx(1.0)
    edges = freedman_diaconis_edges(d)
    assert edges[0] == d.samples[0] and edges[-1] >= d.samples[-1]


def test_variance_population():
    d = EmpiricalDistribution.from_samples([1.0, 2.0, 3.0, 4.0])
    assert d.variance() == pytest.approx(1.25)
    assert d.mean() == pytest.approx(2.5)
