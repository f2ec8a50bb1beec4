import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import sparse

from planmean.quantile import (column_quantiles, coordinatewise_private_median, default_steps, priv_quantile,
                               priv_quantile_binary, priv_quantile_em, rank_error, rank_error_bound)


def test_rank_error_bound_values():
    assert rank_error_bound(1, 1 / math.e, 0.5, 1) == pytest.approx(1.0)
    assert rank_error_bound(20, 0.05, 1 / 3, 1) == pytest.approx(math.sqrt(20 * math.log(400) / (2 / 3)))
    assert rank_error_bound(20, 0.05, 1 / 3, 1) == pytest.approx(13.41, abs=5e-3)


def test_rank_error_bound_grows_like_sqrt_d_log_d():
    ds = np.array([1, 2, 4, 8, 16, 32, 64])
    bounds = np.array([rank_error_bound(10, 0.05, 1.0, int(d)) for d in ds])
    assert np.all(np.diff(bounds) > 0)
    ratio = bounds / np.sqrt(ds * np.log(10 * ds / 0.05))
    np.testing.assert_allclose(ratio, ratio[0])


@pytest.mark.parametrize("args", [(0, 0.05, 1.0, 1), (1, 0.0, 1.0, 1), (1, 1.0, 1.0, 1), (1, 0.05, 0.0, 1),
                                  (1, 0.05, 1.0, 0)])
def test_rank_error_bound_rejects_bad_arguments(args):
    with pytest.raises(ValueError):
        rank_error_bound(*args)


def test_default_steps():
    assert default_steps(-1024, 1024) == 10
    assert default_steps(-1, 1) == 1
    assert default_steps(-1000, 1000) == 10


def test_rank_error_counts_ties():
    values = [1, 2, 2, 2, 3]
    assert rank_error(values, 2, 0.5) == 0
    assert rank_error(values, 3, 0.2) == pytest.approx(4 - 1)
    assert rank_error(values, 0, 0.5) == pytest.approx(2.5)


def test_binary_constant_data():
    rng = np.random.default_rng(0)
    M = 8.0
    out = priv_quantile_binary(np.full(50, 2.7), 0.5, M, 1e6, rng, steps=20)
    assert abs(out - 2.7) <= M * 2 ** -20 * 2


def test_binary_q_zero_lands_at_minimum():
    rng = np.random.default_rng(1)
    values = np.arange(0, 1001, dtype=float)
    out = priv_quantile_binary(values, 0.0, 1024, 1e6, rng, steps=20)
    assert out <= values.min() + 2 * 1024 * 2 ** -20


def test_binary_rank_error_census():
    values = np.arange(0, 1001, dtype=float)
    rng = np.random.default_rng(2)
    bound = rank_error_bound(10, 0.05, 1e6, 1)
    fails = 0
    for _ in range(200):
        out = priv_quantile_binary(values, 0.5, 1024, 1e6, rng)
        # the result is within M 2^-T = 1 of a point meeting the bound
        err = min(rank_error(values, z, 0.5) for z in (out - 1, out, out + 1))
        fails += err > bound
    assert fails <= 10


def test_em_constant_data_has_no_interior_mass():
    # Tied values form zero-width intervals, which carry no weight; the two
    # outer intervals tie on utility, so the output is uniform on [-M, M].
    rng = np.random.default_rng(3)
    M = 10.0
    draws = np.array([priv_quantile_em(np.full(200, -3.0), 0.5, M, 100.0, rng) for _ in range(2000)])
    assert np.all(np.abs(draws) <= M)
    assert np.mean(draws < -3.0) == pytest.approx(0.35, abs=0.04)


def test_em_not_worse_than_binary_on_paired_trials():
    values = np.arange(0, 1001, dtype=float)
    rng = np.random.default_rng(4)
    em, bs = [], []
    for _ in range(200):
        em.append(rank_error(values, priv_quantile_em(values, 0.5, 1024, 1.0, rng), 0.5))
        bs.append(rank_error(values, priv_quantile_binary(values, 0.5, 1024, 1.0, rng), 0.5))
    assert np.mean(em) <= np.mean(bs)


def test_em_top_quantile_at_or_above_maximum():
    values = np.linspace(-5, 5, 101)
    rng = np.random.default_rng(5)
    above = sum(priv_quantile_em(values, 1.0, 10, 50.0, rng) >= values.max() for _ in range(200))
    assert above >= 100


def test_output_range_and_validation():
    rng = np.random.default_rng(6)
    values = np.array([-100.0, 100.0, 50.0])
    for variant in ("em", "binary"):
        out = priv_quantile(values, 0.9, 4.0, 1.0, rng, variant=variant)
        assert -4.0 <= out <= 4.0
    with pytest.raises(ValueError):
        priv_quantile_em([], 0.5, 1.0, 1.0, rng)
    with pytest.raises(ValueError):
        priv_quantile_binary([1.0], 0.5, 1.0, 0.0, rng)
    with pytest.raises(ValueError):
        priv_quantile([1.0], 1.5, 1.0, 1.0, rng)
    with pytest.raises(ValueError):
        priv_quantile([1.0], 0.5, 1.0, 1.0, rng, variant="laplace")


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=40), st.floats(0.0, 1.0),
       st.sampled_from(["em", "binary"]), st.integers(0, 2 ** 32 - 1))
def test_quantile_stays_in_range(values, q, variant, seed):
    out = priv_quantile(values, q, 60.0, 0.5, np.random.default_rng(seed), variant=variant)
    assert -60.0 <= out <= 60.0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=40), st.floats(0.0, 1.0),
       st.sampled_from([0.5, 2.0, 8.0]), st.sampled_from(["em", "binary"]))
def test_scale_equivariance_noiseless(values, q, c, variant):
    values = np.asarray(values)
    kwargs = {"steps": 12} if variant == "binary" else {}
    base = priv_quantile(values, q, 64.0, 1.0, None, variant=variant, noiseless=True, **kwargs)
    scaled = priv_quantile(values * c, q, 64.0 * c, 1.0, None, variant=variant, noiseless=True, **kwargs)
    assert scaled == pytest.approx(c * base, rel=1e-12, abs=1e-12)


def test_coordinatewise_median_d1_matches_1d():
    values = np.random.default_rng(7).normal(size=300)
    a = coordinatewise_private_median(values[:, None], 8.0, 0.7, np.random.default_rng(9))
    b = priv_quantile_em(values, 0.5, 8.0, 0.7, np.random.default_rng(9))
    assert a[0] == b


def test_coordinatewise_median_constant_matrix():
    data = np.full((100, 4), 1.25)
    out = coordinatewise_private_median(data, 16.0, 1e6, np.random.default_rng(0), variant="binary", steps=20)
    np.testing.assert_allclose(out, 1.25, atol=2 * 16.0 * 2 ** -20)


def test_coordinatewise_median_within_three_sigma():
    # n comfortably above sqrt(d / rho) ln(d / beta) ln(M)
    d, n, rho, M = 16, 4000, 1.0, 1000.0
    sigma = np.linspace(1, 20, d)
    rng = np.random.default_rng(10)
    ok = 0
    for _ in range(40):
        data = 5.0 + sigma * rng.standard_normal((n, d))
        mu = coordinatewise_private_median(data, M, rho, rng)
        ok += np.all(np.abs(mu - 5.0) <= 3 * sigma)
    assert ok >= 38


def test_coordinatewise_median_rejects_empty():
    with pytest.raises(ValueError):
        coordinatewise_private_median(np.zeros((5, 0)), 1.0, 1.0, np.random.default_rng(0))


@pytest.mark.parametrize("variant", ["em", "binary"])
def test_sparse_and_dense_agree(variant):
    rng = np.random.default_rng(11)
    dense = (rng.random((300, 12)) < np.linspace(0.01, 0.9, 12)).astype(float)
    dense[:, 3] = 0.0
    dense[:, 4] = 1.0
    for q in (0.0, 0.3, 0.5, 0.99, 1.0):
        a = column_quantiles(dense, q, 0.2, np.random.default_rng(1), bounds=(-2.0, 3.0), variant=variant, steps=12)
        b = column_quantiles(sparse.csr_matrix(dense), q, 0.2, np.random.default_rng(1), bounds=(-2.0, 3.0),
                             variant=variant, steps=12)
        np.testing.assert_array_equal(a, b)


def test_noiseless_em_returns_order_statistic():
    values = np.array([5.0, 1.0, 3.0, 2.0, 4.0])
    assert priv_quantile_em(values, 0.5, 10.0, 1.0, None, noiseless=True) == 3.0
    assert priv_quantile_em(values, 1.0, 10.0, 1.0, None, noiseless=True) == 5.0
    assert priv_quantile_em(values, 0.0, 10.0, 1.0, None, noiseless=True) == 1.0
