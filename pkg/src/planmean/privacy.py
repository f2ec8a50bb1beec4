"""zCDP accounting primitives and the Gaussian mechanism.

Budgets are plain floats everywhere in the package; :class:`PrivacyBudget`
exists for callers that want validation and an explicit type at API
boundaries. All logarithms are natural logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

__all__ = [
    "PrivacyBudget",
    "BudgetSplit",
    "ApproxDPParams",
    "make_rng",
    "spawn",
    "compose",
    "zcdp_to_approx_dp",
    "gaussian_mechanism",
    "divide_budget",
]

RngLike = Union[None, int, np.random.Generator, np.random.SeedSequence]


@dataclass(frozen=True)
class PrivacyBudget:
    """A zCDP budget ``rho``. Zero means nothing may be released."""

    rho: float

    def __post_init__(self):
        if not (self.rho >= 0) or math.isinf(self.rho):
            raise ValueError(f"rho must be a finite non-negative number, got {self.rho!r}")

    def __float__(self) -> float:
        return float(self.rho)

    def __add__(self, other):
        return PrivacyBudget(self.rho + _as_rho(other))

    __radd__ = __add__


@dataclass(frozen=True)
class BudgetSplit:
    """Budgets for recentering (rho1), clip-radius selection (rho2) and noise (rho3)."""

    rho1: float
    rho2: float
    rho3: float

    def __post_init__(self):
        for name in ("rho1", "rho2", "rho3"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> float:
        return math.fsum((self.rho1, self.rho2, self.rho3))

    def __iter__(self):
        return iter((self.rho1, self.rho2, self.rho3))


@dataclass(frozen=True)
class ApproxDPParams:
    epsilon: float
    delta: float


def _as_rho(rho) -> float:
    value = float(rho)
    if not value >= 0:
        raise ValueError(f"rho must be non-negative, got {rho!r}")
    return value


def make_rng(seed: RngLike = None) -> np.random.Generator:
    """Return a numpy Generator. Passing a Generator returns it unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Derive ``n`` independent child generators from ``rng``."""
    return rng.spawn(n)


def compose(budgets: Iterable) -> PrivacyBudget:
    """Sequential composition: the zCDP costs simply add up."""
    return PrivacyBudget(math.fsum(_as_rho(b) for b in budgets))


def zcdp_to_approx_dp(rho, delta: float) -> ApproxDPParams:
    """Convert rho-zCDP into (epsilon, delta)-DP."""
    rho = _as_rho(rho)
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta!r}")
    epsilon = rho + 2.0 * math.sqrt(rho * math.log(1.0 / delta))
    return ApproxDPParams(epsilon=epsilon, delta=delta)


def gaussian_mechanism(value, sensitivity: float, rho, rng: np.random.Generator) -> np.ndarray:
    """Release ``value + N(0, sensitivity**2 / (2 rho) I)``.

    Noise is drawn in coordinate order from ``rng``; with zero sensitivity the
    input is returned unchanged and no randomness is consumed.
    """
    value = np.asarray(value, dtype=float)
    if sensitivity < 0:
        raise ValueError("sensitivity must be non-negative")
    if sensitivity == 0:
        return value.copy()
    rho = _as_rho(rho)
    if rho == 0:
        raise ValueError("rho = 0 with positive sensitivity would need infinite noise")
    scale = sensitivity / math.sqrt(2.0 * rho)
    return value + scale * rng.standard_normal(value.shape)


def divide_budget(rho, d: int = 1, policy: str = "quarter", per_dimension_rho1: bool = False) -> BudgetSplit:
    """Split a total budget into ``(rho1, rho2, rho3)``.

    Args:
        rho: total zCDP budget, must be positive.
        d: dimension; only used when ``per_dimension_rho1`` is set.
        policy: ``"equal-thirds"`` or ``"quarter"``. The latter gives 25% to
            the preprocessing stage, 25% of the remainder to the clip radius
            and the rest to the noise.
        per_dimension_rho1: use ``rho1 = 0.25 rho / d`` instead of
            ``0.25 rho`` under ``"quarter"``.

    The residual is assigned to ``rho3`` so the three parts add back to ``rho``.
    """
    rho = _as_rho(rho)
    if rho <= 0:
        raise ValueError("rho must be positive")
    if d < 1:
        raise ValueError("d must be a positive integer")
    if policy == "equal-thirds":
        rho1 = rho2 = rho / 3.0
    elif policy == "quarter":
        rho1 = 0.25 * rho / d if per_dimension_rho1 else 0.25 * rho
        rho2 = 0.25 * (rho - rho1)
    else:
        raise ValueError(f"unknown budget policy {policy!r}")
    rho3 = rho - rho1 - rho2
    return BudgetSplit(rho1, rho2, rho3)
