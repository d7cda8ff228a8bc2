import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from constsgd.engine import advance_batch
from constsgd.problems import LinearRegressionSpec
from constsgd.stats import (EstimateWithCI, LongRunCovarianceAccumulator, binomial_interval,
                            default_bandwidth, estimate_long_run_cov, fit_scaling,
                            ks_critical_value, ks_normal, lagged_cross_products, log_slope,
                            mean_with_se)
from constsgd.streams import stream_keys


def test_white_noise_long_run_covariance_is_identity():
    x = np.random.default_rng(0).normal(size=(100_000, 3))
    xi = estimate_long_run_cov(x).matrix
    assert np.max(np.abs(xi - np.eye(3))) < 0.05


def test_ar1_sgd_long_run_variance(frozen):
    case = frozen["ar1_long_run_variance_alpha_0p2"]
    spec = LinearRegressionSpec.from_sigma(np.eye(1))
    T = 200_000
    beta = np.zeros((1, 1, 1))
    trace = np.empty((1, T, 1, 1))
    advance_batch(spec, case["alpha"], beta, None, stream_keys(np.array([3], dtype=np.uint64), "main"),
                  0, T, trace=trace)
    path = trace[0, 1000:, 0, 0]
    assert path.var() == pytest.approx(case["stationary_variance"], rel=0.05)
    got = estimate_long_run_cov(path, bandwidth=200, center=np.zeros(1)).matrix[0, 0]
    assert got == pytest.approx(case["value"], rel=0.10)


def test_lagged_products_match_direct_sums():
    x = np.random.default_rng(1).normal(size=(50, 2))
    out = lagged_cross_products(x, 5)
    for h in range(6):
        np.testing.assert_allclose(out[h], x[: 50 - h].T @ x[h:], rtol=1e-10, atol=1e-12)


def test_bandwidth_checks():
    with pytest.raises(ValueError):
        LongRunCovarianceAccumulator(1, 0)
    with pytest.raises(ValueError):
        estimate_long_run_cov(np.zeros(50), bandwidth=10)
    assert default_bandwidth(1000) == 10
    assert default_bandwidth(999) == 9
    assert default_bandwidth(200_000) == 58


def test_binomial_interval_examples():
    lo, hi = binomial_interval(0, 100)
    assert lo == 0.0 and hi == pytest.approx(1 - 0.05 ** 0.01, rel=1e-12)
    lo, hi = binomial_interval(100, 100)
    assert hi == 1.0 and lo == pytest.approx(0.05 ** 0.01, rel=1e-12)
    lo, hi = binomial_interval(50, 100)
    assert lo < 0.5 < hi
    assert (lo, hi) == pytest.approx((0.3983, 0.6017), abs=1e-4)


def test_ks_critical_value_scales_with_root_r():
    assert ks_critical_value(1000) / ks_critical_value(2000) == pytest.approx(math.sqrt(2))


def test_ks_normal_on_gaussian_sample():
    v = np.random.default_rng(2).normal(scale=3.0, size=2000)
    assert ks_normal(v, 9.0) < ks_critical_value(2000)
    assert ks_normal(v, 1.0) > ks_critical_value(2000)


def test_estimate_checks():
    with pytest.raises(ValueError):
        EstimateWithCI(1.0, -0.1, 10)
    with pytest.raises(ValueError):
        EstimateWithCI(1.0, 0.1, 1)
    est = mean_with_se([1.0, 3.0])
    assert est.point == 2.0 and est.se == 1.0
    assert EstimateWithCI(0.0, 0.0, 5).relative_se == 0.0


@given(st.floats(-3, 3), st.floats(0.1, 10))
def test_power_law_recovered_exactly(p, c):
    xs = np.array([1.0, 2.0, 4.0, 8.0])
    ys = c * xs ** p
    slope, se = log_slope(xs, ys)
    assert slope == pytest.approx(p, abs=1e-9)
    assert se < 1e-7
    fit = fit_scaling(xs, ys, p, 0.05)
    assert fit.passed


def test_underpowered_fit_fails():
    xs = [1.0, 2.0, 4.0]
    ys = [1.0, 2.0, 4.0]
    fit = fit_scaling(xs, ys, 1.0, 0.1, ses=[0.5, 1.0, 2.0])
    assert fit.slope_ok and not fit.powered and not fit.passed
    assert fit.to_dict()["pass"] is False


def test_weighted_slope_prefers_precise_points():
    xs = [1.0, 2.0, 4.0]
    ys = [1.0, 2.0, 8.0]
    slope_w, _ = log_slope(xs, ys, ses=[1e-3, 1e-3, 10.0])
    assert slope_w == pytest.approx(1.0, abs=1e-3)
