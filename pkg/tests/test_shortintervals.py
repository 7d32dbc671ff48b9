import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from arithdist import arith
from arithdist.shortintervals import (
    ConfigError,
    F,
    ShortIntervalConfig,
    distribution_experiment,
    increment_samples,
    remainder_series,
    sample_points,
    short_stat_exact,
    short_sum,
    sigma_sq_asymptotic,
    sigma_sq_M,
    theorem_samples,
    theorem_statistic,
    variance_experiment,
)
from arithdist.stats import EmptyDistributionError, ks_to_normal, ks_two_sample

GAMMA = 0.5772156649015329
TAU = [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643]


def test_series_single_term():
    x = 12345.6
    want = math.cos(4 * math.pi * math.sqrt(x) - math.pi / 4) / (math.pi * math.sqrt(2))
    assert remainder_series(x, 1) == pytest.approx(want, rel=1e-14)


def test_series_at_integer_point():
    # x = 10^6 is an integer with d(x) = 49; the series tends to the midpoint
    # of the jump, so the N = 10^4 residual stays large (pinned regression)
    x = 1e6
    assert remainder_series(x, 10**4) - F(x) == pytest.approx(-1.3746948, abs=1e-6)
    midpoint = (arith.delta(x) - 49 / 2) / x**0.25
    assert abs(remainder_series(x, 10**6) - midpoint) <= 0.15


def test_series_rms_decreases():
    xs = 1e6 * (1 + np.random.default_rng(0).random(200))
    rms = [np.sqrt(np.mean([(remainder_series(x, N) - F(x)) ** 2 for x in xs])) for N in (100, 10_000)]
    assert rms[1] < rms[0]


def test_series_hecke_rms_decreases(hecke):
    xs = 1e5 * (1 + np.random.default_rng(1).random(100))
    rms = [np.sqrt(np.mean([(remainder_series(x, N, "hecke") - F(x, "hecke")) ** 2 for x in xs]))
           for N in (100, 10**5)]
    assert rms[1] < rms[0]


def test_short_stat_exact_oracle():
    # brute-force D(104) = 502, D(100) = 482
    assert short_stat_exact(100.0, 5.0) == pytest.approx(-1.0675309008274065, abs=1e-12)


def test_short_stat_no_new_integer():
    assert abs(short_stat_exact(100.3, 1e6)) <= 1e-2


def test_short_stat_hecke_edge():
    rho = [t / n**5.5 for n, t in enumerate(TAU, 1)]
    want = math.fsum(rho) / 9**0.25 - math.fsum(rho[:4]) / 4**0.25
    assert short_stat_exact(4.0, 1.0, "hecke") == pytest.approx(want, abs=1e-14)


def test_short_sum_single_term():
    x, L = 5000.0, 7.0
    want = (-2 / (math.pi * math.sqrt(2)) * math.sin(2 * math.pi / L)
            * math.sin(4 * math.pi * (math.sqrt(x) + 1 / (2 * L)) - math.pi / 4))
    assert short_sum(x, L, 1) == pytest.approx(want, rel=1e-13)


@given(st.floats(2.0, 5e3), st.floats(2.0, 50.0), st.integers(1, 300))
def test_short_sum_product_to_sum(x, L, M):
    y = (math.sqrt(x) + 1 / L) ** 2
    diff = remainder_series(y, M) - remainder_series(x, M)
    assert short_sum(x, L, M) == pytest.approx(diff, abs=1e-12)


def test_short_sum_oracle():
    # 40-digit mpmath loop; phases reach 1.3e6 rad, so one ulp of the
    # argument is ~1e-10 and that is the attainable agreement
    assert short_sum(1e6, 10.0, 10**4) == pytest.approx(-0.93830429964799582572, abs=1e-9)


def test_exact_series_consistency():
    xs = sample_points(ShortIntervalConfig(1e6, 10, 200, 3))
    exact = np.array([short_stat_exact(x, 10) for x in xs])
    rms = [np.sqrt(np.mean((exact - [short_sum(x, 10, M) for x in xs]) ** 2))
           for M in (100, 1000, 10_000)]
    assert rms[0] > rms[1] > rms[2]


def test_sigma_sq_m_examples():
    assert sigma_sq_M(1, 4.0) == pytest.approx(1 / math.pi**2, rel=1e-15)
    assert sigma_sq_M(1, 2.0) == pytest.approx(0.0, abs=1e-30)
    ratio = sigma_sq_M(10**6, 20.0) / sigma_sq_asymptotic(20.0)
    assert 0.75 <= ratio <= 1.25


@given(st.integers(1, 3000), st.integers(1, 500), st.floats(2.0, 100.0))
def test_sigma_sq_m_nondecreasing(M, extra, L):
    assert sigma_sq_M(M + extra, L) >= sigma_sq_M(M, L)


def test_sigma_sq_m_hecke(hecke):
    rho = hecke.normalized[1:11]
    n = np.arange(1, 11)
    want = math.fsum((rho**2 * n**-1.5 * np.sin(2 * np.pi * np.sqrt(n) / 6) ** 2).tolist()) / math.pi**2
    assert sigma_sq_M(10, 6.0, "hecke") == pytest.approx(want, rel=1e-13)


def test_sigma_asymptotic():
    assert sigma_sq_asymptotic(math.e) == pytest.approx(16 / (math.pi**2 * math.e), rel=1e-15)
    assert sigma_sq_asymptotic(math.e) == pytest.approx(0.5963836866747569, abs=1e-15)
    assert sigma_sq_asymptotic(2.0, "hecke", 0.37) == pytest.approx(0.37)
    with pytest.raises(ValueError):
        sigma_sq_asymptotic(1.0)


@given(st.floats(math.e**3, 1e6), st.floats(1.001, 10.0))
def test_sigma_asymptotic_monotone(L, factor):
    assert sigma_sq_asymptotic(L * factor) < sigma_sq_asymptotic(L)


def test_theorem_statistic_numerator():
    # brute force: D(10010) - D(10000) = 108, minus the main-term increment
    x, L = 1e4, 10.0
    num = 4.347284648058121
    norm = x**0.25 * math.sqrt(8 / math.pi**2 * math.log(L) ** 3 / L)
    assert theorem_statistic(x, L) == pytest.approx(num / norm, abs=1e-11)


def test_theorem_statistic_empty_interval():
    x, L = 100.3, 1000.0
    h = math.sqrt(x) / L
    norm = x**0.25 * math.sqrt(8 / math.pi**2 * math.log(L) ** 3 / L)
    assert theorem_statistic(x, L) == pytest.approx(-arith.main_term_increment(x, h) / norm, rel=1e-14)
    assert abs(theorem_statistic(x, L)) < 0.1


def test_theorem_statistic_tracks_doubled_increment():
    # the interval [x, x + sqrt(x)/L] is the S(x, 2L) step to first order
    xs = sample_points(ShortIntervalConfig(1e8, 16, 300, 11))
    a = np.array([theorem_statistic(x, 16) for x in xs])
    b = np.array([short_stat_exact(x, 32) for x in xs]) / math.sqrt(8 / math.pi**2 * math.log(16) ** 3 / 16)
    assert np.sqrt(np.mean((a - b) ** 2)) < 1e-2


def test_theorem_statistic_mean_small():
    d = distribution_experiment(ShortIntervalConfig(1e8, 16, 1000, 4))
    assert abs(d.mean()) <= 0.1


def test_config_validation(cf):
    with pytest.raises(ConfigError):
        ShortIntervalConfig(1e3, 10, 10, 1)
    with pytest.raises(ConfigError):
        ShortIntervalConfig(1e6, 1.5, 10, 1)
    with pytest.raises(ConfigError):
        ShortIntervalConfig(1e6, 10, 10, 1, "hecke")
    with pytest.raises(ConfigError):
        ShortIntervalConfig(5e5, 10, 10, 1, "hecke", cf)
    with pytest.raises(ConfigError):
        ShortIntervalConfig(1e6, 10, 10, -1)
    with pytest.warns(RuntimeWarning):
        ShortIntervalConfig(1e4, 10, 10, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ShortIntervalConfig(4e5, 8, 10, 1, "hecke", cf)


def test_variance_single_sample_degenerate():
    r = variance_experiment(ShortIntervalConfig(1e6, 8, 1, 5))
    assert r.sample_variance == 0.0 and r.degenerate


def test_seeded_reproducible_and_thread_independent():
    cfg = ShortIntervalConfig(1e6, 8, 150, 99)
    a = [s.statistic for s in increment_samples(cfg, threads=1)]
    b = [s.statistic for s in increment_samples(cfg, threads=4)]
    c = [s.statistic for s in increment_samples(cfg, threads=1)]
    assert a == b == c
    assert sample_points(cfg)[0] == sample_points(ShortIntervalConfig(1e6, 8, 3, 99))[0]


def test_empty_distribution():
    with pytest.raises(EmptyDistributionError):
        distribution_experiment(ShortIntervalConfig(1e6, 8, 0, 1))


def test_disjoint_seed_self_consistency():
    # observed: two-sample 0.040, KS to normal 0.125 and 0.114
    d1 = distribution_experiment(ShortIntervalConfig(1e6, 8, 500, 1))
    d2 = distribution_experiment(ShortIntervalConfig(1e6, 8, 500, 2))
    assert ks_two_sample(d1, d2) <= 2 * max(ks_to_normal(d1), ks_to_normal(d2))


def test_hecke_samples(cf):
    cfg = ShortIntervalConfig(1e5, 8, 50, 1, "hecke", cf)
    s = theorem_samples(cfg)
    assert len(s) == 50 and all(math.isfinite(v.statistic) for v in s)
    assert all(1e5 <= v.x <= 2e5 for v in s)
