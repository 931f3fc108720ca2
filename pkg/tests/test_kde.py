import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from evidencia.densities import DomainError
from evidencia.grid import GridDistribution
from evidencia.kde import ZeroBandwidthError, kde_cdf, kde_fit, kde_logpdf, kde_quantile, nrd0_bandwidth


def test_bandwidth_rule_by_hand(rng):
    x = rng.standard_normal(500)
    sd = x.std(ddof=1)
    iqr = np.subtract(*np.percentile(x, [75, 25]))
    assert nrd0_bandwidth(x) == pytest.approx(0.9 * min(sd, iqr / 1.34) * 500 ** -0.2)


def test_bandwidth_two_points():
    # IQR of {-1, 1} is 1 under linear interpolation, smaller than sd = sqrt(2)
    assert nrd0_bandwidth([-1.0, 1.0]) == pytest.approx(0.9 * (1 / 1.34) * 2 ** -0.2)


def test_bandwidth_falls_back_to_sd_when_iqr_vanishes():
    x = np.r_[np.zeros(50), 1.0, -1.0]
    assert nrd0_bandwidth(x) == pytest.approx(0.9 * x.std(ddof=1) * x.size ** -0.2)


def test_identical_data_rejected():
    with pytest.raises(ZeroBandwidthError):
        kde_fit(np.full(10, 3.0))


def test_single_point_density_is_gaussian():
    model = kde_fit([-1.0, 1.0])
    h = model.bandwidth
    expected = np.log(0.5 * (stats.norm(-1, h).pdf(0.3) + stats.norm(1, h).pdf(0.3)))
    assert kde_logpdf(model, 0.3) == pytest.approx(expected, rel=1e-12)


def test_exact_logpdf_matches_brute_force(rng):
    x = rng.standard_t(3, size=700)
    model = kde_fit(x)
    q = np.linspace(-5, 5, 37)
    brute = np.log(stats.norm.pdf((q[:, None] - x[None, :]) / model.bandwidth).mean(axis=1) / model.bandwidth)
    np.testing.assert_allclose(kde_logpdf(model, q), brute, rtol=1e-10)


def test_tabulated_density_tracks_exact(rng):
    model = kde_fit(rng.standard_normal(2_000))
    q = np.linspace(-3, 3, 101)
    np.testing.assert_allclose(model.pdf(q), np.exp(model.exact_logpdf(q)), rtol=1e-3)


def test_kde_normalizes(rng):
    model = kde_fit(rng.gamma(2.0, size=1_000))
    total, _ = integrate.quad(lambda t: np.exp(model.exact_logpdf(t)), -np.inf, np.inf, limit=400)
    assert total == pytest.approx(1.0, abs=1e-6)
    assert model.cdf(model.grid.upper) == 1.0


@settings(max_examples=80, deadline=None)
@given(st.floats(1e-6, 1 - 1e-6))
def test_quantile_cdf_round_trip(u):
    model = kde_fit(np.random.default_rng(4).standard_normal(300))
    assert kde_cdf(model, kde_quantile(model, u)) == pytest.approx(u, abs=1e-9)


def test_quantile_domain(rng):
    model = kde_fit(rng.standard_normal(50))
    with pytest.raises(DomainError):
        kde_quantile(model, 1.0)


def test_cdf_close_to_exact_mixture_cdf(rng):
    x = rng.standard_normal(400)
    model = kde_fit(x)
    q = np.linspace(-3, 3, 13)
    exact = stats.norm.cdf((q[:, None] - x[None, :]) / model.bandwidth).mean(axis=1)
    np.testing.assert_allclose(kde_cdf(model, q), exact, atol=1e-4)


# -- piecewise-linear grid distributions --------------------------------------

def test_grid_cdf_is_exact_for_piecewise_linear_density():
    nodes = np.array([0.0, 1.0, 3.0])
    g = GridDistribution(nodes, np.array([0.0, 1.0, 0.0]))  # triangle with mass 1.5 before scaling
    assert g.cdf(1.0) == pytest.approx(1 / 3)
    assert g.cdf(0.5) == pytest.approx((0.5 * 0.5 * 0.5) / 1.5)
    assert g.ppf(1 / 3) == pytest.approx(1.0)
    assert g.median == pytest.approx(3 - np.sqrt(3))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(0.0, 5.0), min_size=3, max_size=30), st.floats(0.0, 1.0))
def test_grid_ppf_inverts_cdf(values, u):
    dens = np.asarray(values)
    if dens.sum() <= 0:
        dens = dens + 1.0
    g = GridDistribution(np.linspace(-1, 2, dens.size), dens)
    assert g.cdf(g.ppf(u)) == pytest.approx(u, abs=1e-10)


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        GridDistribution([0.0, 0.0, 1.0], [1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        GridDistribution([0.0, 1.0], [0.0, 0.0])
    with pytest.raises(DomainError):
        GridDistribution([0.0, 1.0], [1.0, 1.0]).ppf(1.5)
