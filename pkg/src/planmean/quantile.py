"""Differentially private quantile selection.

Two mechanisms are provided, both operating column-wise on an ``(n, d)``
matrix (a 1-d sequence is treated as a single column):

* ``binary``: a T-step binary search over ``[lower, upper]`` that branches on
  a Gaussian-noised count of the points at or below the current midpoint.
  Each step costs ``rho / T``; the midpoint of the final interval is returned.
* ``em``: the exponential mechanism over the intervals between consecutive
  order statistics, with utility ``-|rank - q n|`` and base measure equal to
  the interval length. Its zCDP cost is ``eps**2 / 8``, so ``eps = sqrt(8 rho)``.

Sparse binary matrices (``scipy.sparse``, entries in {0, 1}) are handled from
column counts without densifying; results are bit-identical to the dense path
under the same generator state.

``noiseless=True`` replaces every private decision by the exact one. It is a
test hook for equivariance and reduction checks and provides no privacy.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import sparse

from .privacy import gaussian_mechanism

__all__ = [
    "VARIANTS",
    "default_steps",
    "rank_error",
    "rank_error_bound",
    "column_quantiles",
    "priv_quantile",
    "priv_quantile_binary",
    "priv_quantile_em",
    "coordinatewise_private_median",
]

VARIANTS = ("em", "binary")


def default_steps(lower: float, upper: float) -> int:
    """Number of binary-search steps so the final midpoint is within ~1 of any point.

    For the symmetric range ``[-M, M]`` this is ``ceil(log2(M))``.
    """
    half_width = (upper - lower) / 2.0
    if half_width <= 1:
        return 1
    return max(1, math.ceil(math.log2(half_width)))


def rank_error(values, z: float, q: float) -> float:
    """Distance between ``q n`` and the set of ranks consistent with ``z``.

    A point ``z`` sits at any rank between ``#{v < z}`` and ``#{v <= z}``; the
    error is zero when ``q n`` falls in that range.
    """
    values = np.asarray(values, dtype=float).ravel()
    target = q * values.size
    below = np.count_nonzero(values < z)
    at_or_below = np.count_nonzero(values <= z)
    return float(max(0.0, below - target, target - at_or_below))


def rank_error_bound(steps: int, beta: float, rho: float, d: int = 1) -> float:
    """High-probability rank error of the binary-search quantile.

    ``sqrt(d T ln(T d / beta) / (2 rho))``; with ``d = 1`` this is the
    single-coordinate bound, otherwise ``rho`` is the total over ``d`` columns.
    """
    if steps < 1 or d < 1:
        raise ValueError("steps and d must be at least 1")
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    if rho <= 0:
        raise ValueError("rho must be positive")
    return math.sqrt(d * steps * math.log(steps * d / beta) / (2.0 * rho))


# -- column machinery ---------------------------------------------------------


def _as_matrix(values):
    if sparse.issparse(values):
        mat = sparse.csc_matrix(values, dtype=float, copy=True)
        mat.eliminate_zeros()
        return mat, True
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError("expected a 1-d sequence or an (n, d) matrix")
    return arr, False


def _ones_per_column(mat) -> np.ndarray:
    mat.sum_duplicates()
    return np.diff(mat.indptr)


def _binary_levels(lower, upper):
    # Where the stored 0/1 values land after clipping to the search range.
    return float(np.clip(0.0, lower, upper)), float(np.clip(1.0, lower, upper))


def _counts_at_or_below(data, is_sparse, thresholds, ones=None, levels=None):
    if not is_sparse:
        return np.count_nonzero(data <= thresholds, axis=0).astype(float)
    n = data.shape[0]
    zero, one = levels
    zeros = n - ones
    counts = np.where(thresholds >= zero, zeros, 0) + np.where(thresholds >= one, ones, 0)
    return counts.astype(float)


def _exact_quantiles(data, is_sparse, q, lower, upper, ones=None):
    n, d = data.shape
    j = min(max(math.ceil(q * n) - 1, 0), n - 1)
    if is_sparse:
        zero, one = _binary_levels(lower, upper)
        return np.where(j < n - ones, zero, one)
    return np.partition(np.clip(data, lower, upper), j, axis=0)[j]


def _em_select(left, width, ranks, n, q, epsilon, u, v):
    """Sample one interval per column and a uniform point inside it.

    ``left`` and ``width`` have shape ``(K, d)``; ``ranks`` is ``(K,)`` or ``(K, d)``.
    Zero-width intervals carry zero weight. Inverse-CDF sampling with the
    first exceeding index breaks ties toward the lower interval.
    """
    with np.errstate(divide="ignore"):
        logw = np.log(width) - (epsilon / 2.0) * np.abs(ranks - q * n)
    logw -= logw.max(axis=0)
    cdf = np.cumsum(np.exp(logw), axis=0)
    idx = np.argmax(cdf > u * cdf[-1], axis=0)
    cols = np.arange(width.shape[1])
    return left[idx, cols] + v * width[idx, cols]


def _em_columns(data, is_sparse, q, rho, rng, lower, upper, ones=None):
    n, d = data.shape
    epsilon = math.sqrt(8.0 * rho)
    if is_sparse:
        zero, one = _binary_levels(lower, upper)
        zeros = n - ones
        first = np.where(zeros > 0, zero, one)
        last = np.where(ones > 0, one, zero)
        left = np.vstack([np.full(d, float(lower)), np.full(d, zero), last])
        width = np.vstack([
            first - lower,
            np.where((zeros > 0) & (ones > 0), one - zero, 0.0),
            upper - last,
        ])
        ranks = np.vstack([np.zeros(d), zeros.astype(float), np.full(d, float(n))])
        u = rng.random(d)
        v = rng.random(d)
        return _em_select(left, width, ranks, n, q, epsilon, u, v)
    edges = np.sort(np.clip(data, lower, upper), axis=0)
    edges = np.vstack([np.full(d, float(lower)), edges, np.full(d, float(upper))])
    width = np.diff(edges, axis=0)
    u = rng.random(d)
    v = rng.random(d)
    ranks = np.arange(n + 1, dtype=float)[:, None]
    return _em_select(edges[:-1], width, ranks, n, q, epsilon, u, v)


def _binary_columns(data, is_sparse, q, rho, rng, lower, upper, steps, noiseless, ones=None):
    n, d = data.shape
    if not is_sparse:
        data = np.clip(data, lower, upper)
    levels = _binary_levels(lower, upper) if is_sparse else None
    lo = np.full(d, float(lower))
    hi = np.full(d, float(upper))
    for _ in range(steps):
        mid = (lo + hi) / 2.0
        counts = _counts_at_or_below(data, is_sparse, mid, ones, levels)
        if not noiseless:
            counts = gaussian_mechanism(counts, 1.0, rho / steps, rng)
        go_left = counts >= q * n
        hi = np.where(go_left, mid, hi)
        lo = np.where(go_left, lo, mid)
    return (lo + hi) / 2.0


def column_quantiles(data, q: float, rho: float, rng, *, bounds, variant: str = "em",
                     steps: int | None = None, noiseless: bool = False) -> np.ndarray:
    """Private ``q``-quantile of every column, each costing ``rho``.

    Args:
        data: ``(n, d)`` array, 1-d array, or sparse 0/1 matrix.
        q: target quantile in ``[0, 1]``.
        rho: zCDP budget spent on *each* column.
        rng: numpy Generator.
        bounds: ``(lower, upper)`` search range; values are clipped into it.
        variant: ``"em"`` or ``"binary"``.
        steps: binary-search depth, defaults to :func:`default_steps`.
        noiseless: return exact quantiles (test hook, not private).

    Returns:
        Array of shape ``(d,)`` with entries in ``[lower, upper]``.
    """
    mat, is_sparse = _as_matrix(data)
    n, d = mat.shape
    lower, upper = float(bounds[0]), float(bounds[1])
    if n == 0:
        raise ValueError("cannot take a quantile of an empty sequence")
    if d == 0:
        raise ValueError("data has no columns")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q!r}")
    if not upper > lower:
        raise ValueError("bounds must satisfy lower < upper")
    if not rho > 0:
        raise ValueError("rho must be positive")
    if variant not in VARIANTS:
        raise ValueError(f"unknown quantile variant {variant!r}")
    ones = _ones_per_column(mat) if is_sparse else None

    if variant == "binary":
        steps = default_steps(lower, upper) if steps is None else int(steps)
        if steps < 1:
            raise ValueError("steps must be at least 1")
        return _binary_columns(mat, is_sparse, q, rho, rng, lower, upper, steps, noiseless, ones)
    if noiseless:
        return _exact_quantiles(mat, is_sparse, q, lower, upper, ones).astype(float)
    return _em_columns(mat, is_sparse, q, rho, rng, lower, upper, ones)


def priv_quantile_binary(values, q: float, M: float, rho: float, rng, *, steps: int | None = None,
                         bounds=None, noiseless: bool = False) -> float:
    """Binary-search quantile of a 1-d sequence over ``[-M, M]`` (or ``bounds``)."""
    values = np.asarray(values, dtype=float).ravel()
    if M <= 0:
        raise ValueError("M must be positive")
    bounds = (-M, M) if bounds is None else bounds
    return float(column_quantiles(values, q, rho, rng, bounds=bounds, variant="binary",
                                  steps=steps, noiseless=noiseless)[0])


def priv_quantile_em(values, q: float, M: float, rho: float, rng, *, bounds=None,
                     noiseless: bool = False) -> float:
    """Exponential-mechanism quantile of a 1-d sequence over ``[-M, M]`` (or ``bounds``)."""
    values = np.asarray(values, dtype=float).ravel()
    if M <= 0:
        raise ValueError("M must be positive")
    bounds = (-M, M) if bounds is None else bounds
    return float(column_quantiles(values, q, rho, rng, bounds=bounds, variant="em",
                                  noiseless=noiseless)[0])


def priv_quantile(values, q: float, M: float, rho: float, rng, *, variant: str = "em", **kwargs) -> float:
    if variant == "em":
        return priv_quantile_em(values, q, M, rho, rng, **kwargs)
    if variant == "binary":
        return priv_quantile_binary(values, q, M, rho, rng, **kwargs)
    raise ValueError(f"unknown quantile variant {variant!r}")


def coordinatewise_private_median(data, M: float, rho: float, rng, *, variant: str = "em",
                                  steps: int | None = None, noiseless: bool = False) -> np.ndarray:
    """Private median of every coordinate; the total cost ``rho`` is split evenly over columns."""
    mat, _ = _as_matrix(data)
    d = mat.shape[1]
    if d == 0:
        raise ValueError("data has no columns")
    if M <= 0:
        raise ValueError("M must be positive")
    return column_quantiles(mat, 0.5, rho / d, rng, bounds=(-M, M), variant=variant,
                            steps=steps, noiseless=noiseless)
