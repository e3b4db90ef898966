import numpy as np
import pytest
import scipy.stats
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from decision_market.equilibrium import PriceSeries
from decision_market.stats import (histogram, imbalance_stats, kurtosis, make_returns,
                                   moments)


def test_constant_prices_give_zero_returns():
    r = make_returns(PriceSeries.from_prices([50.0] * 11), 2)
    assert np.all(r.values == 0.0) and len(r) == 5


def test_single_window_return():
    r = make_returns(PriceSeries.from_prices([100.0, 105.0, 110.0]), 2)
    assert r.values.tolist() == pytest.approx([0.1], rel=1e-15)
    assert r.times.tolist() == [0.0]


def test_geometric_series_returns():
    g, delta = 1.001, 7
    prices = 100.0 * g ** np.arange(100)
    r = make_returns(PriceSeries.from_prices(prices, t0=5), delta)
    assert len(r) == 99 // delta
    np.testing.assert_allclose(r.values, g ** delta - 1.0, rtol=1e-10)
    assert r.times[1] - r.times[0] == delta and r.times[0] == 5


def test_log_returns_and_overflowing_prices():
    logs = np.array([0.0, 800.0, 1600.0])
    lr = make_returns(PriceSeries(0, 1.0, logs), 1, log=True)
    assert lr.values.tolist() == [800.0, 800.0]
    rel = make_returns(PriceSeries(0, 1.0, np.array([0.0, np.log(2.0), 900.0])), 1)
    assert rel.values[0] == pytest.approx(1.0)
    assert np.isinf(rel.values[1])


def test_make_returns_rejects_short_series():
    with pytest.raises(ValueError):
        make_returns(PriceSeries.from_prices([1.0, 2.0]), 2)
    with pytest.raises(ValueError):
        make_returns(PriceSeries.from_prices([1.0, 2.0]), 0)


@given(st.integers(2, 300), st.integers(1, 50))
def test_returns_length(n, interval):
    prices = PriceSeries.from_prices(np.linspace(1.0, 2.0, n))
    if n <= interval:
        with pytest.raises(ValueError):
            make_returns(prices, interval)
    else:
        assert len(make_returns(prices, interval)) == (n - 1) // interval


def test_kurtosis_two_point_law():
    assert kurtosis([-1.0, 1.0] * 10) == pytest.approx(1.0, rel=1e-15)


def test_kurtosis_brute_force_oracle():
    xs = [0.0, 0.0, 0.0, 0.0, 1.0]
    mu = sum(xs) / 5
    m2 = sum((x - mu) ** 2 for x in xs) / 5
    m4 = sum((x - mu) ** 4 for x in xs) / 5
    assert m4 / m2 ** 2 == pytest.approx(3.25, rel=1e-14)
    assert kurtosis(xs) == pytest.approx(3.25, rel=1e-14)


def test_kurtosis_normal_reference():
    x = np.random.default_rng(1).standard_normal(200_000)
    assert kurtosis(x) == pytest.approx(3.0, abs=4 * np.sqrt(24 / x.size))


def test_kurtosis_rejects_degenerate():
    with pytest.raises(ValueError):
        kurtosis([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        kurtosis([2.0] * 10)
    with pytest.raises(ValueError):
        moments([2.0] * 10)


def test_moments_against_scipy():
    x = np.random.default_rng(5).standard_t(5, 5000)
    s = moments(x)
    assert s.n == 5000
    assert s.mean == pytest.approx(x.mean())
    assert s.variance == pytest.approx(np.var(x))
    assert s.skewness == pytest.approx(scipy.stats.skew(x), rel=1e-10)
    assert s.kurtosis == pytest.approx(scipy.stats.kurtosis(x, fisher=False), rel=1e-10)
    assert s.excess_kurtosis == pytest.approx(s.kurtosis - 3.0)


finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


@given(arrays(float, st.integers(4, 60), elements=finite),
       st.floats(min_value=0.01, max_value=100), st.floats(min_value=-100, max_value=100))
def test_kurtosis_affine_invariance(x, a, b):
    if np.var(x) < 1e-6 * max(1.0, np.abs(x).max()) ** 2:
        return
    k = kurtosis(x)
    assert k >= 1.0 - 1e-9
    assert kurtosis(a * x + b) == pytest.approx(k, rel=1e-9)


@given(arrays(float, st.integers(4, 60), elements=finite))
def test_kurtosis_matches_scipy(x):
    if np.var(x) < 1e-6 * max(1.0, np.abs(x).max()) ** 2:
        return
    assert kurtosis(x) == pytest.approx(scipy.stats.kurtosis(x, fisher=False), rel=1e-8)


def test_imbalance_alternating():
    s = imbalance_stats([0.3, -0.3] * 20)
    assert s.lag1_autocorr == pytest.approx(-1.0, abs=1e-12)
    assert s.longest_one_sided_run == 1


def test_imbalance_constant():
    s = imbalance_stats([0.2] * 17)
    assert s.longest_one_sided_run == 17
    assert s.variance == 0.0 and s.lag1_autocorr == 0.0


def test_imbalance_white_noise():
    x = np.random.default_rng(3).uniform(-1, 1, 10_000)
    assert abs(imbalance_stats(x).lag1_autocorr) < 3 / np.sqrt(x.size)


def test_imbalance_runs():
    s = imbalance_stats([0.1, 0.2, -0.1, -0.5, -0.2, 0.0, 0.4])
    assert s.longest_one_sided_run == 3
    with pytest.raises(ValueError):
        imbalance_stats([])


def test_histogram_normalised_and_matched():
    x = np.random.default_rng(9).normal(0.5, 2.0, 20_000)
    c, d, n = histogram(x, 40)
    width = c[1] - c[0]
    assert (d * width).sum() == pytest.approx(1.0, abs=1e-9)
    mu, var = x.mean(), x.var()
    assert n == pytest.approx(scipy.stats.norm.pdf(c, mu, np.sqrt(var)), rel=1e-12)
    with pytest.raises(ValueError):
        histogram(x, 1)


def test_histogram_symmetric_data():
    x = np.random.default_rng(2).standard_normal(100_000)
    x = np.concatenate([x, -x])
    _, d, _ = histogram(x, 20)
    np.testing.assert_allclose(d, d[::-1], rtol=1e-12)


def test_stats_are_pure():
    x = np.random.default_rng(0).standard_normal(100)
    assert moments(x) == moments(x.copy())
