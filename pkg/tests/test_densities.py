import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from evidencia.densities import (DomainError, InvalidSkewnessError, MvtParams, SkewTParams, cdf_normal, cdf_t,
                                 log_cdf_t, logpdf_mvn, logpdf_mvt, logpdf_skewt, logpdf_t1, quantile_normal,
                                 quantile_t, sample_mvt, sample_skewt)


def test_standard_normal_at_zero():
    assert logpdf_mvn(np.zeros(1), np.zeros(1), np.eye(1)) == pytest.approx(-0.5 * np.log(2 * np.pi), abs=1e-12)


def test_mvn_matches_scipy(rng):
    a = rng.standard_normal((3, 3))
    cov = a @ a.T + np.eye(3)
    mean = rng.standard_normal(3)
    x = rng.standard_normal((20, 3))
    np.testing.assert_allclose(logpdf_mvn(x, mean, cov), stats.multivariate_normal(mean, cov).logpdf(x), rtol=1e-10)


def test_mvn_rejects_indefinite_covariance():
    with pytest.raises(np.linalg.LinAlgError):
        logpdf_mvn(np.zeros(2), np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_quantile_normal_domain():
    assert quantile_normal(0.975) == pytest.approx(1.959964, abs=1e-6)
    for bad in (0.0, 1.0, -0.1, np.nan):
        with pytest.raises(DomainError):
            quantile_normal(bad)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.001, 0.999))
def test_normal_quantile_round_trip(u):
    assert cdf_normal(quantile_normal(u)) == pytest.approx(u, abs=1e-12)


def test_t1_and_mvt_match_scipy(rng):
    x = rng.standard_normal(10) * 3
    np.testing.assert_allclose(logpdf_t1(x, 3.0), stats.t(3.0).logpdf(x), rtol=1e-12)
    assert logpdf_mvt(np.zeros(1), MvtParams(np.zeros(1), np.eye(1), 3.0)) == pytest.approx(-1.000889, abs=1e-6)
    lam = np.array([[2.0, 0.3, 0.0], [0.3, 1.0, 0.2], [0.0, 0.2, 0.5]])
    mu = np.array([0.5, -1.0, 2.0])
    y = rng.standard_normal((15, 3))
    ref = stats.multivariate_t(mu, lam, df=4.5).logpdf(y)
    np.testing.assert_allclose(logpdf_mvt(y, MvtParams(mu, lam, 4.5)), ref, rtol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(-30, 30), st.floats(0.5, 60))
def test_log_cdf_t_agrees_with_direct_log(x, nu):
    direct = np.log(stats.t(nu).cdf(x))
    assert log_cdf_t(x, nu) == pytest.approx(direct, rel=1e-9, abs=1e-12)


def test_log_cdf_t_deep_tail_stays_finite():
    value = log_cdf_t(-1e30, 3.0)
    assert np.isfinite(value) and value < -150


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0005, 0.9995), st.floats(0.5, 80))
def test_t_quantile_round_trip(u, nu):
    assert cdf_t(quantile_t(u, nu), nu) == pytest.approx(u, abs=1e-10)


def test_t_quantile_domain():
    with pytest.raises(DomainError):
        quantile_t(1.0, 3.0)


def test_mvt_sampler_moments(rng):
    lam = np.array([[1.0, 0.5], [0.5, 2.0]])
    x = sample_mvt(rng, 200_000, MvtParams(np.array([1.0, -1.0]), lam, 6.0))
    np.testing.assert_allclose(x.mean(axis=0), [1.0, -1.0], atol=0.02)
    np.testing.assert_allclose(np.cov(x, rowvar=False), lam * 6 / 4, rtol=0.05)


def test_skewt_without_skewness_is_t(rng):
    lam = np.array([[1.0, 0.4], [0.4, 1.5]])
    y = rng.standard_normal((25, 2))
    a = logpdf_skewt(y, SkewTParams(np.zeros(2), lam, np.zeros(2), 5.0))
    b = logpdf_mvt(y, MvtParams(np.zeros(2), lam, 5.0))
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_skewt_rejects_excess_skewness():
    with pytest.raises(InvalidSkewnessError):
        SkewTParams(np.zeros(2), np.eye(2), np.array([0.8, 0.8]), 3.0)


@pytest.mark.parametrize("nu,delta", [(3.0, 0.99), (10.0, 0.5), (1.5, -0.7)])
def test_univariate_skewt_integrates_to_one(nu, delta):
    params = SkewTParams(np.zeros(1), np.eye(1), np.array([delta]), nu)
    total, _ = integrate.quad(lambda t: np.exp(logpdf_skewt(np.array([t]), params)), -np.inf, np.inf, limit=200)
    assert total == pytest.approx(1.0, abs=1e-7)


def test_skewt_sampler_matches_density(rng):
    params = SkewTParams(np.zeros(1), np.eye(1), np.array([0.9]), 4.0)
    draws = sample_skewt(rng, 20_000, params)[:, 0]

    lo = -40.0
    grid = np.linspace(lo, 60.0, 200_001)
    dens = np.exp(logpdf_skewt(grid[:, None], params))
    start = integrate.quad(lambda t: np.exp(logpdf_skewt(np.array([t]), params)), -np.inf, lo)[0]
    table = start + integrate.cumulative_trapezoid(dens, grid, initial=0.0)
    ks = stats.kstest(draws, lambda v: np.interp(v, grid, table, left=0.0, right=1.0))
    assert ks.pvalue > 1e-3


def test_skewt_sampler_skews_first_axis_only(rng):
    params = SkewTParams(np.zeros(3), np.eye(3), np.array([0.99, 0.0, 0.0]), 10.0)
    x = sample_skewt(rng, 100_000, params)
    assert x[:, 0].mean() > 0.5
    np.testing.assert_allclose(x[:, 1:].mean(axis=0), 0.0, atol=0.02)
