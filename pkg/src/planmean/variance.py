"""Private per-coordinate variance estimates.

The generic estimator splits a column into groups of ``2k`` samples and
computes ``y = sum_j (x_{2j} - x_{2j+1})**2 / 2`` per group. For Gaussian
data ``y / sigma**2`` is chi-squared with ``k`` degrees of freedom, so the
private median of the ``y`` values divided by ``k (1 - 2/(9k))**3`` estimates
``sigma**2``. Pairing removes the unknown mean without spending budget on it.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import sparse

from .privacy import gaussian_mechanism
from .quantile import column_quantiles, priv_quantile

__all__ = [
    "chi2_median_correction",
    "estimate_variances",
    "variance_estimate_generic",
    "variance_estimate_gaussian_direct",
    "variance_estimate_binary",
    "regularize_sigma",
    "binary_variance_floor",
]

# P(Z <= 1) for a standard normal is about 0.841.
DIRECT_QUANTILE = 0.841


def chi2_median_correction(k: int) -> float:
    """Wilson-Hilferty approximation of median(chi2_k) / k."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return (1.0 - 2.0 / (9.0 * k)) ** 3


def binary_variance_floor(d: int) -> float:
    return float(d) ** (-0.4)


def _pair_statistics(columns: np.ndarray, k: int) -> np.ndarray:
    n, d = columns.shape
    groups = n // (2 * k)
    if groups < 1:
        raise ValueError(f"need at least 2k = {2 * k} samples, got {n}")
    used = columns[: groups * 2 * k].reshape(groups, k, 2, d)
    diff = used[:, :, 0, :] - used[:, :, 1, :]
    return (diff * diff).sum(axis=1) / 2.0


def estimate_variances(data, M: float, rho: float, rng, *, k: int = 1, variance_floor: float = 1.0,
                       variant: str = "em", steps: int | None = None, upper: float | None = None,
                       shuffle: bool = False, noiseless: bool = False) -> np.ndarray:
    """Generic variance estimate of every column; the total budget ``rho`` is split evenly.

    Args:
        data: ``(n, d)`` matrix or 1-d sample; entries are clipped to ``[-M, M]``.
        M: range bound of the data.
        rho: total zCDP budget over all columns.
        rng: numpy Generator.
        k: half group size; ``n // (2k)`` groups are formed in input order.
        variance_floor: lower bound applied to every estimate.
        variant: quantile mechanism for the median of the group statistics.
        steps: binary-search depth; defaults to ``ceil(log2(upper / variance_floor))``.
        upper: top of the search range for group statistics, default ``M**2``.
        shuffle: permute rows before grouping.
        noiseless: exact medians (test hook).

    Returns:
        Vector of ``d`` variance estimates, each at least ``variance_floor``.
    """
    if sparse.issparse(data):
        data = data.toarray()
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if M <= 0:
        raise ValueError("M must be positive")
    if variance_floor < 0:
        raise ValueError("variance_floor must be non-negative")
    x = np.clip(x, -M, M)
    if shuffle:
        x = x[rng.permutation(x.shape[0])]
    stats = _pair_statistics(x, int(k))
    upper = M * M if upper is None else float(upper)
    if variant == "binary" and steps is None:
        resolution = variance_floor if variance_floor > 0 else 1e-12
        steps = max(1, math.ceil(math.log2(upper / resolution)))
    median = column_quantiles(stats, 0.5, rho / x.shape[1], rng, bounds=(0.0, upper),
                              variant=variant, steps=steps, noiseless=noiseless)
    estimate = median / (k * chi2_median_correction(k))
    return np.maximum(estimate, variance_floor)


def variance_estimate_generic(samples, M: float, rho: float, rng, *, k: int = 4, variance_floor: float = 1.0,
                              variant: str = "em", steps: int | None = None, upper: float | None = None,
                              shuffle: bool = False, noiseless: bool = False) -> float:
    """Variance of a 1-d sample from the private median of grouped pair differences.

    >>> import numpy as np
    >>> variance_estimate_generic(np.full(16, 3.0), 10.0, 1.0, np.random.default_rng(0), k=2,
    ...                           variance_floor=0.5, variant="binary")
    0.5
    """
    samples = np.asarray(samples, dtype=float).ravel()
    return float(estimate_variances(samples, M, rho, rng, k=k, variance_floor=variance_floor, variant=variant,
                                    steps=steps, upper=upper, shuffle=shuffle, noiseless=noiseless)[0])


def variance_estimate_gaussian_direct(samples, mu_tilde: float, M: float, rho: float, rng, *,
                                      variance_floor: float = 1.0, variant: str = "em",
                                      steps: int | None = None, noiseless: bool = False) -> float:
    """Gaussian variance from the private 0.841-quantile, which sits near ``mu + sigma``."""
    samples = np.clip(np.asarray(samples, dtype=float).ravel(), -M, M)
    kwargs = {"noiseless": noiseless}
    if variant == "binary":
        kwargs["steps"] = steps
    upper = priv_quantile(samples, DIRECT_QUANTILE, M, rho, rng, variant=variant, **kwargs)
    sigma_hat = upper - mu_tilde
    if sigma_hat < 0:
        return float(variance_floor)
    return float(max(sigma_hat * sigma_hat, variance_floor))


def variance_estimate_binary(data, rho: float, rng, *, variance_floor: float | None = None) -> np.ndarray:
    """Bernoulli variances ``q (1 - q)`` from noisy column frequencies.

    Changing one row moves every column mean by at most ``1/n``, so the vector
    of means has l2 sensitivity ``sqrt(d) / n``. Noisy frequencies are clamped
    to ``[0, 1]`` and the variances floored at ``d ** (-2/5)`` by default.
    """
    if sparse.issparse(data):
        mat = sparse.csr_matrix(data, dtype=float)
        values = mat.data
        n, d = mat.shape
        means = np.asarray(mat.sum(axis=0)).ravel() / n
    else:
        arr = np.asarray(data, dtype=float)
        if arr.ndim != 2:
            raise ValueError("data must be an (n, d) matrix")
        values = arr
        n, d = arr.shape
        means = arr.mean(axis=0) if n else None
    if n == 0 or d == 0:
        raise ValueError("empty dataset")
    if np.any((values != 0) & (values != 1)):
        raise ValueError("binary variance estimation needs 0/1 entries")
    freq = np.clip(gaussian_mechanism(means, math.sqrt(d) / n, rho, rng), 0.0, 1.0)
    floor = binary_variance_floor(d) if variance_floor is None else variance_floor
    return np.maximum(freq * (1.0 - freq), floor)


def regularize_sigma(sigma_hat) -> np.ndarray:
    """Add the mean standard deviation ``||sigma_hat||_1 / d`` to every coordinate."""
    sigma_hat = np.atleast_1d(np.asarray(sigma_hat, dtype=float))
    if np.any(sigma_hat < 0):
        raise ValueError("standard deviations must be non-negative")
    return sigma_hat + sigma_hat.sum() / sigma_hat.size
