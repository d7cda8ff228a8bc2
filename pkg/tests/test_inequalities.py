import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from constsgd.inequalities import (MAX_PRODUCT_OUTCOMES, check_maximal_inequality_exact,
                                   check_norm_equivalence, check_rio_exact,
                                   check_taylor_remainder, conditional_mean_zero,
                                   maximal_sides, norm_equivalence_violations, random_rio_instance,
                                   rio_sides, run_maximal_check, run_rio_check,
                                   run_taylor_check, taylor_remainder_batch)
from constsgd.problems import FiniteSupportDist


def point(x, y):
    return FiniteSupportDist((((tuple(x), tuple(y)), F(1)),))


# ---------------------------------------------------------------- Taylor remainder

def test_taylor_zero_direction_is_exact():
    lhs, rhs = taylor_remainder_batch([[1.0, -2.0]], [[0.0, 0.0]], 0.3, 4, 3.0)
    assert lhs[0] == 0 and rhs[0] == 0


def test_taylor_quadratic_case_is_equality():
    # s = q = 2: |x - a z|^2 - |x|^2 + 2a<x, z> = a^2 |z|^2, which is the bound
    rng = np.random.default_rng(0)
    x, z = rng.normal(size=(2, 50, 5))
    lhs, rhs = taylor_remainder_batch(x, z, 0.2, 2, 2.0)
    np.testing.assert_allclose(np.asarray(lhs, float), np.asarray(rhs, float), rtol=1e-15)


def test_taylor_from_origin():
    assert check_taylor_remainder([0.0, 0.0], [1.0, 2.0], 0.5, 4, 6.0)


def test_taylor_input_checks():
    with pytest.raises(ValueError):
        check_taylor_remainder([1.0], [1.0, 2.0], 0.1, 2, 2)
    with pytest.raises(ValueError):
        check_taylor_remainder([np.nan], [1.0], 0.1, 2, 2)
    with pytest.raises(ValueError):
        check_taylor_remainder([1.0], [1.0], 0.1, 3, 2)


def test_taylor_small_run():
    summary = run_taylor_check(2000, seed=1)
    assert summary.passed and summary.instances == 2000
    assert 0.5 < summary.worst_ratio <= 1.0 + 1e-12


@given(st.integers(1, 8).flatmap(lambda d: st.tuples(
           arrays(np.float64, d, elements=st.floats(-3, 3)),
           arrays(np.float64, d, elements=st.floats(-3, 3)))),
       st.floats(1e-3, 1.0), st.sampled_from([2, 4, 6, 8]), st.floats(2.0, 8.0))
def test_taylor_property(xz, alpha, s, q):
    x, z = xz
    assert check_taylor_remainder(x, z, alpha, s, q)


# ---------------------------------------------------------------- Rio-type inequality

def test_rio_zero_perturbation():
    sides = rio_sides(point([1, 2], [0, 0]), 4, 3.0)
    assert sides.rhs_conditional is not None
    assert sides.lhs == pytest.approx(sides.rhs_conditional, rel=1e-14)
    assert check_rio_exact(point([1, 2], [0, 0]), 4, 3.0)


def test_rio_zero_base_point():
    joint = FiniteSupportDist(((((0, 0), (1, -1)), F(1, 2)), (((0, 0), (-1, 1)), F(1, 2))))
    assert conditional_mean_zero(joint)
    sides = rio_sides(joint, 2, 2.0)
    assert sides.lhs == pytest.approx(2.0)
    assert sides.holds()


def test_conditional_mean_detection():
    assert not conditional_mean_zero(point([1], [1]))
    joint = FiniteSupportDist(((((1,), (F(1, 3),)), F(1, 2)), (((1,), (F(-1, 3),)), F(1, 2))))
    assert conditional_mean_zero(joint)
    assert rio_sides(point([1], [1]), 2, 2.0).rhs_conditional is None


def test_random_mean_zero_instances_are_mean_zero():
    rng = np.random.default_rng(3)
    for _ in range(50):
        assert conditional_mean_zero(random_rio_instance(rng, mean_zero=True))


def test_rio_small_run():
    summary = run_rio_check(200, seed=2)
    assert summary.passed
    assert summary.details["conditional_instances"] > 0


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([2, 4]), st.sampled_from([2, 3, 4]))
def test_rio_property(seed, s, q):
    joint = random_rio_instance(np.random.default_rng(seed))
    assert check_rio_exact(joint, s, q)


# ---------------------------------------------------------------- maximal inequality

def test_maximal_degenerate_vectors():
    fixed = FiniteSupportDist((((1, 2), F(1)),))
    sides = maximal_sides([fixed, fixed], 2.0)
    assert sides.lhs == 0.0 and sides.rhs == 0.0 and sides.holds()


def test_maximal_single_term():
    coin = FiniteSupportDist((((1, 0), F(1, 2)), ((-1, 0), F(1, 2))))
    sides = maximal_sides([coin], 2.0)
    assert sides.lhs == pytest.approx(1.0)
    assert sides.rhs == pytest.approx(math.e ** 2)


def test_maximal_rejects_large_support_and_mixed_dims():
    wide = FiniteSupportDist(tuple((((i,), F(1, 4)) for i in range(4))))
    with pytest.raises(ValueError, match=str(MAX_PRODUCT_OUTCOMES)):
        maximal_sides([wide] * 5, 2.0)
    other = FiniteSupportDist((((1, 2), F(1)),))
    with pytest.raises(ValueError):
        maximal_sides([wide, other], 2.0)
    with pytest.raises(ValueError):
        maximal_sides([], 2.0)


def test_maximal_small_run():
    summary = run_maximal_check(40, seed=3)
    assert summary.passed and summary.worst_ratio < 1


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([2, 3, 4]))
def test_maximal_property(seed, q):
    from constsgd.inequalities import random_vector_dist
    rng = np.random.default_rng(seed)
    assert check_maximal_inequality_exact([random_vector_dist(rng, 3) for _ in range(3)], q)


# ---------------------------------------------------------------- norm equivalence

def test_norm_equivalence_examples():
    assert norm_equivalence_violations(np.zeros((3, 4)))[0] == 0
    v, lo, hi = norm_equivalence_violations(np.ones((1, 10)))
    assert v == 0 and hi == pytest.approx(10 ** 0.25)


def test_norm_equivalence_small_run():
    for d in (2, 10, 100):
        summary = check_norm_equivalence(d, 5000, seed=4)
        assert summary.passed
        assert summary.details["max_ratio"] <= summary.details["d_pow_1_over_s"] * (1 + 1e-12)
