import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from arithdist.randommodel import (
    DomainError,
    ModelConfig,
    gaussian_moment,
    model_components,
    model_moments_mc,
    model_samples,
    model_terms,
    sample_model_sum,
    squarefree_sieve,
)
from arithdist.shortintervals import sigma_sq_M


def naive_mu(k):
    out, m, p = 1, k, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            out = -out
        p += 1
    return -out if m > 1 else out


def naive_d(n):
    return sum(1 for k in range(1, n + 1) if n % k == 0)


def test_squarefree_small():
    assert squarefree_sieve(10).tolist() == [1, 2, 3, 5, 6, 7, 10]
    assert squarefree_sieve(1).tolist() == [1]
    with pytest.raises(DomainError):
        squarefree_sieve(0)


def test_squarefree_count_mobius_oracle():
    M = 10**6
    # #{n <= M squarefree} = sum_k mu(k) floor(M / k^2)
    want = sum(naive_mu(k) * (M // (k * k)) for k in range(1, 1001))
    assert want == 607926
    assert squarefree_sieve(M).size == want


@given(st.integers(1, 3000))
def test_squarefree_matches_mobius(M):
    assert squarefree_sieve(M).tolist() == [n for n in range(1, M + 1) if naive_mu(n) != 0]


def test_gaussian_moment():
    assert [gaussian_moment(m) for m in range(7)] == [1, 0, 1, 0, 3, 0, 15]
    assert gaussian_moment(20) == 654729075
    with pytest.raises(DomainError):
        gaussian_moment(21)
    with pytest.raises(DomainError):
        gaussian_moment(-1)


def test_single_term_phase_alignment():
    L = 4.0
    cfg = ModelConfig(1, L, 1, 0)
    assert sample_model_sum(cfg, 0, theta=[1 / 8 - 1 / L]) == pytest.approx(0.0, abs=1e-15)


def test_forced_zero_phase_against_loop():
    M, L = 300, 7.0
    total = 0.0
    for n in range(1, M + 1):
        r = math.sqrt(n)
        amp = -2 / (math.pi * math.sqrt(2)) * naive_d(n) * n**-0.75 * math.sin(2 * math.pi * r / L)
        total += amp * math.sin(2 * math.pi * (r / L - 1 / 8))
    sigma = math.sqrt(sigma_sq_M(M, L))
    got = sample_model_sum(ModelConfig(M, L, 1, 0), 0, theta=0.0)
    assert got == pytest.approx(total / sigma, rel=1e-12)


def test_decomposition_covers_each_n_once():
    t = model_terms(5000, 10.0)
    n = t.squarefree[t.q_index] * t.f**2
    assert n.tolist() == list(range(1, 5001))


@pytest.fixture(scope="module")
def mc():
    return model_moments_mc(ModelConfig(1000, 10.0, 10_000, 17))


def test_mean_zero(mc):
    assert abs(mc.estimates[0]) <= 3 * mc.standard_errors[0]


def test_second_moment_unit(mc):
    assert abs(mc.estimates[1] - 1.0) <= 4 * mc.standard_errors[1]


def exact_third_moment(M, L):
    # independence across q leaves sum_q E[Y_q^3]; each is a trigonometric
    # polynomial in theta of degree <= 3 sqrt(M), integrated exactly on a grid
    t = model_terms(M, L)
    grid = (np.arange(4096) + 0.5) / 4096
    m3 = 0.0
    for qi in range(t.squarefree.size):
        idx = np.flatnonzero(t.q_index == qi)
        y = (t.amplitude[idx, None]
             * np.sin(2 * np.pi * (t.offset[idx, None] + t.f[idx, None] * grid[None, :]))).sum(0)
        m3 += np.mean(y**3)
    return m3 / t.sigma**3


def test_third_moment_matches_exact(mc):
    # the model is skewed at finite L through resonant triples f1 + f2 = f3
    want = exact_third_moment(1000, 10.0)
    assert abs(mc.estimates[2] - want) <= 4 * mc.standard_errors[2]


def test_per_q_second_moment_decays():
    cfg = ModelConfig(10**4, 5.0, 2000, 3)
    sq = model_terms(cfg.M, cfg.L).squarefree
    comps = np.stack([model_components(cfg, i) for i in range(cfg.trials)])
    m2 = (comps**2).mean(axis=0)
    # dyadic blocks of q beyond L^2 = 25
    blocks = [m2[(sq >= 2**k) & (sq < 2 ** (k + 1))].mean() for k in range(5, 13)]
    assert all(a > b for a, b in zip(blocks, blocks[1:]))


def test_independence_across_q():
    cfg = ModelConfig(10**4, 5.0, 2000, 3)
    sq = model_terms(cfg.M, cfg.L).squarefree
    comps = np.stack([model_components(cfg, i) for i in range(cfg.trials)])
    for q1, q2 in ((1, 2), (30, 101), (3, 1001)):
        a, b = comps[:, np.searchsorted(sq, q1)], comps[:, np.searchsorted(sq, q2)]
        c = (a - a.mean()) * (b - b.mean())
        assert abs(c.mean()) <= 4 * c.std() / math.sqrt(c.size)


def test_components_sum_to_model_sum():
    cfg = ModelConfig(2000, 8.0, 3, 5)
    t = model_terms(cfg.M, cfg.L)
    for trial in range(3):
        assert model_components(cfg, trial).sum() / t.sigma == pytest.approx(
            sample_model_sum(cfg, trial), abs=1e-12)


def test_single_trial_no_standard_errors():
    r = model_moments_mc(ModelConfig(100, 5.0, 1, 1))
    assert r.standard_errors is None
    assert r.to_dict()["standardErrorsAvailable"] is False


def test_deterministic_and_thread_independent():
    cfg = ModelConfig(2000, 8.0, 300, 42)
    a = model_samples(cfg, threads=1)
    b = model_samples(cfg, threads=3)
    assert np.array_equal(a, b)
    assert model_moments_mc(cfg).estimates == model_moments_mc(cfg).estimates
    assert a[5] == pytest.approx(sample_model_sum(cfg, 5), abs=1e-13)


def test_config_validation():
    for kw in ({"M": 0}, {"trials": 0}, {"L": 1.5}, {"max_moment": 21}, {"seed": -1}):
        args = {"M": 10, "L": 5.0, "trials": 1, "seed": 0, **kw}
        with pytest.raises(DomainError):
            ModelConfig(**args)
