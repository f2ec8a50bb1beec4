import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from planmean.privacy import (BudgetSplit, PrivacyBudget, compose, divide_budget, gaussian_mechanism, make_rng,
                              spawn, zcdp_to_approx_dp)


def test_compose_adds_budgets():
    assert compose([0.3, 0.2]).rho == pytest.approx(0.5, rel=1e-15)
    assert compose([]).rho == 0.0
    assert compose([0.25, 0.1875, 0.5625]).rho == 1.0


def test_compose_accepts_budget_objects():
    assert compose([PrivacyBudget(0.1), PrivacyBudget(0.2)]).rho == pytest.approx(0.3)
    assert (PrivacyBudget(0.1) + 0.2).rho == pytest.approx(0.3)


def test_negative_budget_rejected():
    with pytest.raises(ValueError):
        PrivacyBudget(-0.1)
    with pytest.raises(ValueError):
        compose([0.1, -0.2])


def test_zcdp_to_approx_dp_values():
    assert zcdp_to_approx_dp(0.0, 0.1).epsilon == 0.0
    assert zcdp_to_approx_dp(1.0, 1.0).epsilon == 1.0
    expected = 0.5 + 2.0 * math.sqrt(0.5 * 6.0 * math.log(10.0))
    out = zcdp_to_approx_dp(0.5, 1e-6)
    assert out.epsilon == pytest.approx(expected, rel=1e-12)
    assert out.epsilon == pytest.approx(5.7566, abs=1e-4)
    assert out.delta == 1e-6


@pytest.mark.parametrize("delta", [0.0, -1e-3, 1.5])
def test_zcdp_to_approx_dp_rejects_bad_delta(delta):
    with pytest.raises(ValueError):
        zcdp_to_approx_dp(0.5, delta)


@given(st.floats(1e-6, 10.0), st.floats(1e-6, 10.0), st.floats(1e-12, 0.9))
def test_conversion_monotone_in_rho(r1, r2, delta):
    if r1 == r2:
        return
    lo, hi = sorted((r1, r2))
    assert zcdp_to_approx_dp(lo, delta).epsilon < zcdp_to_approx_dp(hi, delta).epsilon


@given(st.floats(1e-4, 10.0), st.floats(1e-12, 0.99), st.floats(1e-12, 0.99))
def test_conversion_decreasing_in_delta(rho, d1, d2):
    if d1 == d2:
        return
    lo, hi = sorted((d1, d2))
    assert zcdp_to_approx_dp(rho, lo).epsilon > zcdp_to_approx_dp(rho, hi).epsilon


def test_divide_budget_policies():
    thirds = divide_budget(1.0, policy="equal-thirds")
    assert tuple(thirds) == pytest.approx((1 / 3, 1 / 3, 1 / 3))
    quarter = divide_budget(1.0)
    assert tuple(quarter) == (0.25, 0.1875, 0.5625)
    assert math.fsum(divide_budget(0.12, policy="equal-thirds")) == pytest.approx(0.12, abs=1e-17)


def test_divide_budget_literal_per_dimension_reading():
    split = divide_budget(1.0, d=10, per_dimension_rho1=True)
    assert split.rho1 == pytest.approx(0.025)
    assert split.rho2 == pytest.approx(0.25 * 0.975)
    assert split.total == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("rho", [0.0, -1.0])
def test_divide_budget_rejects_non_positive(rho):
    with pytest.raises(ValueError):
        divide_budget(rho)


def test_divide_budget_rejects_unknown_policy():
    with pytest.raises(ValueError):
        divide_budget(1.0, policy="halves")


@given(st.floats(1e-9, 1e6), st.integers(1, 4096), st.sampled_from(["equal-thirds", "quarter"]), st.booleans())
def test_budget_conservation(rho, d, policy, per_dim):
    split = divide_budget(rho, d, policy, per_dim)
    assert min(split) >= 0
    assert abs(math.fsum(split) - rho) <= 4 * math.ulp(rho)


def test_budget_split_rejects_negative_part():
    with pytest.raises(ValueError):
        BudgetSplit(0.1, -0.1, 0.2)


def test_gaussian_mechanism_zero_sensitivity_is_identity():
    rng = make_rng(1)
    state = rng.bit_generator.state
    value = np.array([1.5, -2.0, 3.25])
    out = gaussian_mechanism(value, 0.0, 0.0, rng)
    np.testing.assert_array_equal(out, value)
    assert rng.bit_generator.state == state


def test_gaussian_mechanism_rejects_zero_budget():
    with pytest.raises(ValueError):
        gaussian_mechanism(np.zeros(3), 1.0, 0.0, make_rng(0))


def test_gaussian_mechanism_is_deterministic_per_seed():
    a = gaussian_mechanism(np.zeros(5), 2.0, 0.5, make_rng(7))
    b = gaussian_mechanism(np.zeros(5), 2.0, 0.5, make_rng(7))
    np.testing.assert_array_equal(a, b)


def test_gaussian_mechanism_variance():
    draws = gaussian_mechanism(np.zeros(100_000), 2.0, 0.5, make_rng(3))
    assert draws.var() == pytest.approx(4.0, rel=0.05)


def test_gaussian_mechanism_noise_is_normal():
    draws = gaussian_mechanism(np.zeros(100_000), 3.0, 0.25, make_rng(11))
    standardized = draws / (3.0 / math.sqrt(0.5))
    assert stats.kstest(standardized, "norm").pvalue > 0.01


def test_spawn_gives_independent_streams():
    children = spawn(make_rng(5), 3)
    draws = [c.random() for c in children]
    assert len(set(draws)) == 3
    np.testing.assert_array_equal([c.random() for c in spawn(make_rng(5), 3)],
                                  [c.random() for c in spawn(make_rng(5), 3)])
