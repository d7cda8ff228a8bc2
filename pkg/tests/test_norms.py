import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from constsgd.norms import (check_norm_order, choose_s_d, elementwise_power, lq_moment,
                            ls_norm, ls_norms, max_norm)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
vectors = st.integers(1, 40).flatmap(lambda d: arrays(np.float64, d, elements=finite))
even_s = st.sampled_from([2, 4, 6, 8, 10, 20, 40])


def test_pythagorean():
    assert ls_norm([3, 4], 2) == 5.0


def test_zero_vector():
    for s in (2, 4, 40):
        assert ls_norm(np.zeros(5), s) == 0.0


def test_uniform_entries_against_extended_precision(frozen):
    case = frozen["ls_norm_uniform64_s40"]
    assert ls_norm(np.array(case["x"]), 40) == pytest.approx(case["value"], rel=1e-12)


def test_overflow_safe(frozen):
    case = frozen["ls_norm_huge_s40"]
    got = ls_norm(np.array(case["x"]), 40)
    assert math.isfinite(got)
    assert got == pytest.approx(case["value"], rel=1e-12)


def test_rejects_odd_or_small_s():
    for s in (0, 1, 3, 5, 2.5):
        with pytest.raises(ValueError, match="s must be even"):
            ls_norm([1.0], s)
    assert check_norm_order(4.0) == 4


def test_rejects_non_finite():
    with pytest.raises(ValueError):
        ls_norm([1.0, np.nan], 2)
    with pytest.raises(ValueError):
        max_norm([np.inf])


def test_max_norm_examples():
    assert max_norm([-3, 2]) == 3.0
    assert max_norm([0, 0, 0]) == 0.0


def test_norm_decreases_to_max_as_s_doubles():
    rng = np.random.default_rng(4)
    for d in (3, 17, 200):
        x = rng.normal(size=d)
        values = [ls_norm(x, 2 ** j) for j in range(1, 11)]
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert values[-1] >= max_norm(x)
        assert values[-1] == pytest.approx(max_norm(x), rel=d ** (1 / 1024))


def test_choose_s_d_examples():
    assert choose_s_d(1) == 2
    assert choose_s_d(2) == 2
    assert choose_s_d(10) == 4
    assert choose_s_d(1000) == 8
    with pytest.raises(ValueError):
        choose_s_d(0)


@given(st.integers(1, 10**7))
def test_choose_s_d_is_smallest_even_above_log(d):
    s = choose_s_d(d)
    assert s % 2 == 0 and s > math.log(d)
    assert s == 2 or s - 2 <= math.log(d)
    assert d ** (1 / s) <= math.e


def test_elementwise_power_examples():
    assert elementwise_power([1, -1], 3).tolist() == [1, -1]
    assert elementwise_power([2, 3], 2).tolist() == [4, 9]
    x = np.array([0.3, -2.0, 5.0])
    assert np.array_equal(elementwise_power(x, 1), x)


def test_lq_moment_examples(frozen):
    est = lq_moment([5, 5, 5], 2)
    assert est.point == 5.0 and est.se == 0.0
    assert lq_moment([0, 2], 2).point == pytest.approx(frozen["sqrt2"], rel=1e-15)
    rng = np.random.default_rng(1)
    est = lq_moment(np.abs(rng.normal(size=10_000)), 4)
    assert abs(est.point - frozen["abs_normal_l4"]) <= 3 * est.se
    with pytest.raises(ValueError):
        lq_moment([], 2)


@given(vectors, even_s)
def test_norm_equivalence_sandwich(x, s):
    s_d = choose_s_d(x.size)
    v = ls_norm(x, s_d)
    m = max_norm(x)
    assert m <= v <= math.e * m * (1 + 1e-12)


@given(vectors, st.floats(-1e3, 1e3, allow_nan=False), even_s)
def test_homogeneity(x, c, s):
    assert ls_norm(c * x, s) == pytest.approx(abs(c) * ls_norm(x, s), rel=1e-12, abs=1e-300)


@given(st.integers(1, 30).flatmap(lambda d: st.tuples(arrays(np.float64, d, elements=finite),
                                                       arrays(np.float64, d, elements=finite))),
       even_s)
def test_triangle_inequality(pair, s):
    x, y = pair
    lhs = ls_norm(x + y, s)
    rhs = ls_norm(x, s) + ls_norm(y, s)
    assert lhs <= rhs * (1 + 1e-12) + 1e-12


@given(st.integers(1, 20).flatmap(lambda d: arrays(np.float64, (5, d), elements=finite)), even_s)
def test_rowwise_matches_scalar(rows, s):
    got = ls_norms(rows, s, chunk=7)
    want = [ls_norm(r, s) for r in rows]
    np.testing.assert_allclose(got, want, rtol=1e-13, atol=0)


def test_lq_moment_survives_huge_samples():
    est = lq_moment([1e200, 1e200, 0.0, 0.0], 4)
    assert est.point == pytest.approx(1e200 * 0.5 ** 0.25, rel=1e-14)
    assert math.isfinite(est.se)
