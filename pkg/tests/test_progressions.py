import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from arithdist import arith
from arithdist.progressions import (
    ConfigError,
    ProgressionConfig,
    _residue_sums,
    delta_rule,
    progression_experiment,
    sharp_progression_values,
    sharp_smooth_gap,
    smoothed_progression_values,
    voronoi_dual_eval,
    voronoi_dual_values,
)
from arithdist.special import QuadratureAccuracyError
from arithdist.windows import WindowSpec

GAMMA = 0.5772156649015329
PRIMES = [p for p in range(3, 400) if all(p % q for q in range(2, int(p**0.5) + 1))]


def naive_d(n):
    return sum(1 for k in range(1, n + 1) if n % k == 0)


def naive_w(d, x):
    def g(t):
        if t <= 0:
            return 0.0
        if t >= 1:
            return 1.0
        e = 1 / t - 1 / (1 - t)
        return 0.0 if e > 700 else 1 / (1 + math.exp(e))
    if x <= d or x >= 1:
        return 0.0
    if x < 2 * d:
        return g((x - d) / d)
    return 1.0 if x <= 1 - d else g((1 - x) / d)


def naive_smoothed(p, phi, d):
    """Straight loops plus scipy quadrature, sharing no code with the package."""
    X = p * p / phi
    edges = [d, 2 * d, 1 - d, 1.0]
    q = lambda f: sum(integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-13, limit=400)[0]
                      for a, b in zip(edges[:-1], edges[1:]))
    c = math.log(X) + 2 * GAMMA - 2 * math.log(p)
    sec = X * q(lambda u: (math.log(u) + c) * naive_w(d, u)) / p**2
    norm = math.sqrt(q(lambda u: naive_w(d, u) ** 2)) * math.sqrt(
        2 / math.pi**2 * (X / p) * math.log(p * p / X + 2) ** 3)
    weights = [0.0] + [naive_d(n) * naive_w(d, n / X) for n in range(1, int(X) + 1)]
    sums = [math.fsum(weights[a::p]) for a in range(p)]
    mean = math.fsum(weights) / p - sec
    return np.array([(sums[a] - mean) / norm for a in range(1, p)])


def test_sharp_divisor_small_example():
    r = sharp_progression_values(ProgressionConfig(5, 25 / 20))
    assert r.sums[0] == 12  # d(1) + d(6) + d(11) + d(16)
    assert r.values.shape == (4,)
    X = 20.0
    total = sum(naive_d(n) for n in range(1, 21))
    mean = total / 5 - (X / 25) * (math.log(X) - 1 + 2 * GAMMA - 2 * math.log(5))
    norm = math.sqrt(2 / math.pi**2 * (X / 5) * math.log(25 / X + 2) ** 3)
    assert r.values[0] == pytest.approx((12 - mean) / norm, rel=1e-14)


def test_sharp_hecke_small_example(cf):
    r = sharp_progression_values(ProgressionConfig(3, 9 / 4, "hecke", cf_value=cf))
    # rho(1) + rho(4) = 1 - 1472 / 4^5.5
    assert r.sums[0] == pytest.approx(1 - 1472 / 2048, abs=1e-15)
    assert r.sums[0] == pytest.approx(0.28125, abs=1e-15)


@given(st.sampled_from(PRIMES), st.floats(1.0, 50.0))
def test_mass_conservation(p, phi):
    cfg = ProgressionConfig(p, phi) if p * p / phi >= p else None
    if cfg is None:
        return
    r = sharp_progression_values(cfg)
    X = int(math.floor(cfg.X))
    on_p = sum(naive_d(n) for n in range(p, X + 1, p)) if X < 3000 else \
        int(arith.divisor_table(X).values[p::p].astype(np.int64).sum())
    assert int(np.sum(r.sums)) + on_p == arith.divisor_summatory(X)


def test_smoothed_against_naive():
    want = naive_smoothed(101, 16, 0.05)
    got = smoothed_progression_values(ProgressionConfig(101, 16, window=WindowSpec(0.05))).values
    assert np.max(np.abs(got - want)) < 1e-10


def test_smoothed_plateau_weight_exact():
    from arithdist.windows import window_eval
    s = WindowSpec(0.2499)
    assert np.all(window_eval(s, np.linspace(0.5, 0.75, 11)) == 1.0)


def test_residue_sums_reduction_order():
    w = np.random.default_rng(1).standard_normal(10_007)
    got = _residue_sums(w, 97)
    want = [math.fsum(w[r::97]) for r in range(97)]
    assert np.allclose(got, want, rtol=0, atol=1e-12)


def test_dual_small_case():
    # p = 13, X = 16, so Y = 169/16
    cfg = ProgressionConfig(13, 169 / 16, window=WindowSpec(0.05))
    direct = smoothed_progression_values(cfg).values[0]
    dual = voronoi_dual_eval(cfg, 1, tol=1e-6)
    assert dual.value == pytest.approx(direct, abs=1e-5)
    assert dual.rms_estimate <= 1e-6


@pytest.mark.parametrize("mode", ["divisor", "hecke"])
def test_dual_identity(mode, cf):
    cfg = ProgressionConfig(101, 16, mode, WindowSpec(0.05), cf if mode == "hecke" else None)
    direct = smoothed_progression_values(cfg).values
    dual = voronoi_dual_values(cfg, tol=1e-5)
    assert np.max(np.abs(direct - dual.values)) <= 1e-4
    assert dual.rms_estimate <= 1e-5
    assert dual.tail_bound >= dual.rms_estimate
    if mode == "hecke":
        # tau_f(n) = 0 for n < 0: only positive terms are summed
        assert dual.terms == int(math.floor(cfg.Y * dual.xi_max))


def test_dual_tolerance_unreachable(cf):
    cfg = ProgressionConfig(101, 16, "hecke", WindowSpec(0.05), cf)
    with pytest.raises(QuadratureAccuracyError):
        voronoi_dual_values(cfg, tol=1e-9)


def test_dual_preconditions():
    with pytest.raises(ConfigError):
        voronoi_dual_values(ProgressionConfig(101, 16))
    with pytest.raises(ConfigError):
        voronoi_dual_values(ProgressionConfig(101, 2, window=WindowSpec(0.05)))
    with pytest.raises(ConfigError):
        voronoi_dual_eval(ProgressionConfig(101, 16, window=WindowSpec(0.05)), 202)


def test_config_validation(cf):
    with pytest.raises(ConfigError):
        ProgressionConfig(100, 16)
    with pytest.raises(ConfigError):
        ProgressionConfig(101, 0.5)
    with pytest.raises(ConfigError):
        ProgressionConfig(101, 200)  # X < p
    with pytest.raises(ConfigError):
        ProgressionConfig(101, 16, "hecke")
    with pytest.raises(ConfigError):
        ProgressionConfig(4001, 1, "hecke", cf_value=cf)
    with pytest.raises(ConfigError):
        ProgressionConfig(101, 16, "other")


def test_sharp_smooth_gap_trend():
    gaps = {}
    for p in (1009, 10007):
        X = p * p / 25
        gaps[p] = sharp_smooth_gap(ProgressionConfig(p, 25), delta_rule(p, X))
        assert gaps[p] >= 0
    assert gaps[10007] < gaps[1009]


def test_sharp_smooth_gap_precondition():
    with pytest.raises(ConfigError):
        sharp_smooth_gap(ProgressionConfig(101, 25), 0.1)


def test_experiment_plumbing():
    d = progression_experiment(ProgressionConfig(5, 25 / 20))
    assert d.n == 4


def test_experiment_centered():
    d = progression_experiment(ProgressionConfig(10007, 25))
    assert abs(d.mean()) <= 3 / math.sqrt(10006)
