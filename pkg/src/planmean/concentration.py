"""Empirical checks of the tail conditions PLAN relies on, and two classical tail bounds.

A distribution is well concentrated, for a target norm ``p``, when both the
raw deviation ``sum_i |X_i - mu_i|**p`` and the variance-scaled deviation
``sum_i (X_i - mu_i)**2 / sigma_hat_i**(4/(p+2))`` rarely exceed ``t`` times
their typical size, with tails decaying exponentially in ``t``.
:func:`tail_check` measures those exceedance fractions on a sample and fits
the decay rate. The polylog slack of the formal definition is not modelled,
so the check is stricter than the definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

__all__ = [
    "ConcentrationReport",
    "sigma_hat_window",
    "tail_check",
    "bernstein_bound",
    "chernoff_hoeffding_bound",
]

PASS_SLOPE = -0.1


@dataclass(frozen=True)
class ConcentrationReport:
    t_grid: np.ndarray
    raw_fractions: np.ndarray
    scaled_fractions: np.ndarray
    raw_slope: float
    scaled_slope: float
    out_of_domain: np.ndarray
    n: int

    @property
    def passed(self) -> bool:
        return bool(self.raw_slope < PASS_SLOPE and self.scaled_slope < PASS_SLOPE)

    @property
    def decay_rate(self) -> float:
        """The slower of the two fitted decay rates (negated log-slopes)."""
        return -max(self.raw_slope, self.scaled_slope)

    def rows(self):
        for t, raw, scaled, flag in zip(self.t_grid, self.raw_fractions, self.scaled_fractions, self.out_of_domain):
            yield float(t), float(raw), float(scaled), bool(flag)


def sigma_hat_window(sigma, p: float = 2):
    """Range of admissible variance estimates: ``sigma <= sigma_hat <= upper``."""
    sigma = np.asarray(sigma, dtype=float)
    r = 2.0 * p / (p + 2.0)
    upper = (sigma ** r + np.sum(sigma ** r) / sigma.size) ** (1.0 / r)
    return sigma, upper


def _fit_slope(t_grid, fractions, n) -> float:
    usable = fractions > 10.0 / n
    if np.count_nonzero(usable) < 2:
        return math.nan
    slope, _ = np.polyfit(t_grid[usable], np.log(fractions[usable]), 1)
    return float(slope)


def tail_check(samples, mu, sigma, sigma_hat=None, p: float = 2, t_grid=None) -> ConcentrationReport:
    """Exceedance fractions of the raw and scaled deviation conditions over a grid of ``t``.

    Args:
        samples: ``(n, d)`` array or sparse matrix.
        mu: true mean vector.
        sigma: true per-coordinate scale (``sigma_i**p`` is the ``p``-th central moment).
        sigma_hat: estimate inside :func:`sigma_hat_window`; defaults to ``sigma``.
        p: target norm.
        t_grid: thresholds; sorted before use. Values ``t <= 1`` are evaluated but flagged.

    Returns:
        A :class:`ConcentrationReport`. A slope is ``nan`` when fewer than two
        grid points have more than ``10 / n`` exceedances.
    """
    x = samples.toarray() if sparse.issparse(samples) else np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, d = x.shape
    mu = np.broadcast_to(np.asarray(mu, dtype=float), (d,))
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (d,))
    if np.any(sigma <= 0):
        raise ValueError("sigma must be positive")
    if sigma_hat is None:
        sigma_hat = sigma
    sigma_hat = np.broadcast_to(np.asarray(sigma_hat, dtype=float), (d,))
    lower, upper = sigma_hat_window(sigma, p)
    if np.any(sigma_hat < lower * (1 - 1e-12)) or np.any(sigma_hat > upper * (1 + 1e-12)):
        raise ValueError("sigma_hat lies outside the admissible window around sigma")
    t_grid = np.sort(np.atleast_1d(np.asarray(t_grid if t_grid is not None else np.linspace(1.0, 4.0, 31),
                                              dtype=float)))

    centred = x - mu
    raw = np.sum(np.abs(centred) ** p, axis=1) / np.sum(sigma ** p)
    scaled = np.sum(centred ** 2 / sigma_hat ** (4.0 / (p + 2.0)), axis=1) / np.sum(sigma ** (2.0 * p / (p + 2.0)))
    raw_fr = np.array([np.count_nonzero(raw > t) / n for t in t_grid])
    scaled_fr = np.array([np.count_nonzero(scaled > t) / n for t in t_grid])
    return ConcentrationReport(
        t_grid=t_grid,
        raw_fractions=raw_fr,
        scaled_fractions=scaled_fr,
        raw_slope=_fit_slope(t_grid, raw_fr, n),
        scaled_slope=_fit_slope(t_grid, scaled_fr, n),
        out_of_domain=t_grid <= 1.0,
        n=n,
    )


def bernstein_bound(variance_sum: float, abs_bound: float, t: float) -> float:
    """``P[sum X_i > t] <= exp(-(t**2 / 2) / (V + M t / 3))`` for independent zero-mean ``|X_i| <= M``."""
    if variance_sum < 0 or abs_bound < 0 or t < 0:
        raise ValueError("inputs must be non-negative")
    if t == 0:
        return 1.0
    denom = variance_sum + abs_bound * t / 3.0
    if denom == 0:
        return 0.0
    return math.exp(-(t * t / 2.0) / denom)


def chernoff_hoeffding_bound(ranges, t: float) -> float:
    """``P[|sum X_i - E sum X_i| > t] <= 2 exp(-(t**2 / 2) / sum w_i**2)``, capped at 1.

    ``w_i`` is the width of the interval holding ``X_i``.
    """
    widths = np.atleast_1d(np.asarray(ranges, dtype=float))
    if np.any(widths < 0) or t < 0:
        raise ValueError("widths and t must be non-negative")
    total = float(np.sum(widths ** 2))
    if t == 0:
        return 1.0
    if total == 0:
        return 0.0
    return min(1.0, 2.0 * math.exp(-(t * t / 2.0) / total))
