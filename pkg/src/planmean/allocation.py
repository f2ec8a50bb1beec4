"""Noise shaping for ``d`` queries with different sensitivities.

Answering query ``i`` (sensitivity ``Delta_i``) as ``s_i * (q_i / s_i + noise)``
with one spherical Gaussian draw for the rescaled vector costs
``Delta_bar**2 = sum_i (Delta_i / s_i)**2`` in sensitivity. Minimising the
expected ``p``-th moment of the total error gives ``s_i ∝ Delta_i**(2/(p+2))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SensitivityProfile",
    "scaling_exponent",
    "optimal_scaling",
    "combined_sensitivity",
    "expected_pth_moment",
    "optimal_moment",
    "gaussian_abs_moment",
]


@dataclass(frozen=True)
class SensitivityProfile:
    deltas: np.ndarray
    p: float = 2

    def __post_init__(self):
        deltas = np.atleast_1d(np.asarray(self.deltas, dtype=float))
        if deltas.ndim != 1 or deltas.size == 0:
            raise ValueError("deltas must be a non-empty vector")
        if np.any(~np.isfinite(deltas)) or np.any(deltas <= 0):
            raise ValueError("every sensitivity must be positive and finite")
        if not self.p > 0:
            raise ValueError("p must be positive")
        object.__setattr__(self, "deltas", deltas)


def scaling_exponent(p: float) -> float:
    return 2.0 / (p + 2.0)


def _moment_constant(p: float, rho: float) -> float:
    if not rho > 0:
        raise ValueError("rho must be positive")
    return math.gamma((p + 1.0) / 2.0) / (rho ** (p / 2.0) * math.sqrt(math.pi))


def optimal_scaling(profile: SensitivityProfile) -> np.ndarray:
    """``s_i = Delta_i**(2/(p+2)) * gamma`` with ``gamma`` chosen so that ``sum (Delta_i / s_i)**2 = 1``."""
    deltas, p = profile.deltas, profile.p
    gamma = math.sqrt(float(np.sum(deltas ** (2.0 * p / (p + 2.0)))))
    return deltas ** scaling_exponent(p) * gamma


def combined_sensitivity(profile: SensitivityProfile, s) -> float:
    s = np.asarray(s, dtype=float)
    if s.shape != profile.deltas.shape or np.any(s <= 0):
        raise ValueError("scalings must be positive with one entry per query")
    return math.sqrt(float(np.sum((profile.deltas / s) ** 2)))


def expected_pth_moment(profile: SensitivityProfile, s, rho: float) -> float:
    """``E sum_i |eta_i|**p`` for the scale/noise/rescale pipeline at zCDP budget ``rho``."""
    p = profile.p
    delta_bar = combined_sensitivity(profile, s)
    s = np.asarray(s, dtype=float)
    return _moment_constant(p, rho) * float(np.sum((delta_bar * s) ** p))


def optimal_moment(profile: SensitivityProfile, rho: float) -> float:
    """Closed-form minimum: the moment constant times ``||Delta||_{2p/(p+2)} ** p``."""
    p = profile.p
    r = 2.0 * p / (p + 2.0)
    norm = float(np.sum(profile.deltas ** r)) ** (1.0 / r)
    return _moment_constant(p, rho) * norm ** p


def gaussian_abs_moment(sigma: float, p: float) -> float:
    """``E|X|**p`` for ``X ~ N(0, sigma**2)``."""
    if not sigma > 0 or not p > 0:
        raise ValueError("sigma and p must be positive")
    return sigma ** p * 2.0 ** (p / 2.0) * math.gamma((p + 1.0) / 2.0) / math.sqrt(math.pi)
