"""The PLAN mean estimator and the baselines it is compared against.

PLAN recenters the data on a private coordinate-wise median, rescales each
coordinate by ``sigma2_hat ** (-1 / (p + 2))``, clips the rescaled rows to a
privately chosen radius ``C``, adds spherical Gaussian noise to their sum and
maps the result back. With ``p = 2`` the noise on coordinate ``i`` ends up
proportional to ``sigma_hat_i ** (1/2)``, which gives l2 error scaling with
``||sigma||_1`` instead of ``sqrt(d) ||sigma||_2``.

Rows are processed in fixed-size dense blocks. Dense and sparse inputs go
through exactly the same arithmetic, so they give identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np
from scipy import sparse

from .privacy import BudgetSplit, divide_budget, gaussian_mechanism
from .quantile import VARIANTS, column_quantiles, coordinatewise_private_median, default_steps, rank_error_bound

__all__ = [
    "VarianceProfile",
    "PlanParams",
    "PlanResult",
    "clip_to_radius",
    "empirical_mean",
    "plan_mean",
    "unscaled_plan",
    "naive_gaussian_mean",
    "plan_estimate",
    "clip_universe_bound",
    "add_unit_variance_noise",
]

BLOCK_ROWS = 1024
# Resolution 2**-16 around the tied value of a 0/1 column.
BINARY_CENTER_STEPS = 16


@dataclass(frozen=True)
class VarianceProfile:
    """Per-coordinate variance estimates used to shape the noise.

    Zeros are floored at ``floor`` before exponentiation; negative entries
    are rejected.
    """

    sigma2_hat: np.ndarray
    floor: float = 1e-9

    def __post_init__(self):
        sigma2 = np.atleast_1d(np.asarray(self.sigma2_hat, dtype=float))
        if sigma2.ndim != 1 or sigma2.size == 0:
            raise ValueError("sigma2_hat must be a non-empty vector")
        if np.any(~np.isfinite(sigma2)) or np.any(sigma2 < 0):
            raise ValueError("variance estimates must be finite and non-negative")
        object.__setattr__(self, "sigma2_hat", np.maximum(sigma2, self.floor))

    @classmethod
    def ones(cls, d: int) -> "VarianceProfile":
        return cls(np.ones(d))

    @classmethod
    def from_std(cls, sigma_hat, floor: float = 1e-9) -> "VarianceProfile":
        return cls(np.asarray(sigma_hat, dtype=float) ** 2, floor=floor)

    @property
    def d(self) -> int:
        return self.sigma2_hat.size

    def scale_factors(self, p: float) -> np.ndarray:
        return self.sigma2_hat ** (-1.0 / (p + 2.0))

    def is_uniform(self) -> bool:
        return bool(np.all(self.sigma2_hat == self.sigma2_hat[0]))


@dataclass(frozen=True)
class PlanParams:
    """Configuration of a PLAN run.

    ``k`` is the target number of clipped rows; ``"auto"`` means
    ``sqrt(n)`` plus the rank-error bound of the clipping quantile at
    ``beta / 3``. ``clip_universe`` is the upper end of the search range for
    ``C``; ``None`` picks it from the variance profile. ``center_variant``
    and ``center_steps`` override ``quantile_variant`` and ``steps`` for the
    recentering step only.
    """

    M: float
    split: BudgetSplit
    p: float = 2
    beta: float = 0.05
    quantile_variant: str = "em"
    center_variant: str | None = None
    k: Union[float, str] = "auto"
    clip_universe: float | None = None
    steps: int | None = None
    center_steps: int | None = None

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("M must be positive")
        if self.p < 1:
            raise ValueError("p must be at least 1")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        for variant in (self.quantile_variant, self.center_variant):
            if variant is not None and variant not in VARIANTS:
                raise ValueError(f"unknown quantile variant {variant!r}")
        if self.k != "auto" and not float(self.k) >= 0:
            raise ValueError("k must be non-negative or 'auto'")


@dataclass
class PlanResult:
    mean_estimate: np.ndarray
    mu_tilde: np.ndarray
    clip_radius: float
    clipped_count: int
    budgets_spent: BudgetSplit
    k: float
    noise: np.ndarray = field(repr=False)
    variance_rho: float = 0.0

    @property
    def total_rho(self) -> float:
        return math.fsum((*self.budgets_spent, self.variance_rho))


# -- helpers --------------------------------------------------------------------


def _as_data(data):
    if sparse.issparse(data):
        return sparse.csr_matrix(data, dtype=float), True
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError("data must be an (n, d) matrix")
    return arr, False


def _blocks(mat, is_sparse):
    n = mat.shape[0]
    for start in range(0, n, BLOCK_ROWS):
        block = mat[start:start + BLOCK_ROWS]
        yield block.toarray() if is_sparse else np.array(block, dtype=float)


def _row_norms(y: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->i", y, y))


def _shrink_factors(norms: np.ndarray, C: float) -> np.ndarray:
    out = np.ones_like(norms)
    big = norms > C
    out[big] = C / norms[big]
    return out


def clip_to_radius(vectors, C: float) -> np.ndarray:
    """Scale every row by ``min(C / ||row||_2, 1)``; zero rows stay zero."""
    vectors = np.asarray(vectors, dtype=float)
    if C < 0:
        raise ValueError("C must be non-negative")
    rows = np.atleast_2d(vectors)
    out = rows * _shrink_factors(_row_norms(rows), C)[:, None]
    return out.reshape(vectors.shape)


def empirical_mean(data) -> np.ndarray:
    mat, is_sparse = _as_data(data)
    if mat.shape[0] == 0:
        raise ValueError("empirical mean of an empty dataset")
    total = np.zeros(mat.shape[1])
    for block in _blocks(mat, is_sparse):
        total += block.sum(axis=0)
    return total / mat.shape[0]


def clip_universe_bound(profile: VarianceProfile, p: float, beta: float) -> float:
    """Upper end of the search range for the clip radius.

    ``sqrt(max(ln d, 1) ln(1/beta) sum_i sigma_hat_i ** (2p / (p + 2)))``:
    the scaled squared norm of a row concentrates around the last sum, which
    for ``p = 2`` is ``||sigma_hat||_1``.
    """
    sigma_hat = np.sqrt(profile.sigma2_hat)
    mass = float(np.sum(sigma_hat ** (2.0 * p / (p + 2.0))))
    return math.sqrt(max(math.log(profile.d), 1.0) * math.log(1.0 / beta) * mass)


def add_unit_variance_noise(data, rng) -> np.ndarray:
    """Add independent N(0, 1) noise to every entry, making each sigma_i >= 1."""
    mat, is_sparse = _as_data(data)
    dense = mat.toarray() if is_sparse else mat
    return dense + rng.standard_normal(dense.shape)


# -- estimators -------------------------------------------------------------------


def plan_mean(data, profile: VarianceProfile, params: PlanParams, rng, *, noiseless: bool = False) -> PlanResult:
    """Run PLAN with a given variance profile.

    Args:
        data: ``(n, d)`` array or sparse 0/1 matrix. Dense entries outside
            ``[-M, M]`` are clipped into the cube.
        profile: variance estimates, one per coordinate.
        params: see :class:`PlanParams`; ``params.split`` must have positive parts.
        rng: numpy Generator.
        noiseless: exact quantiles and no Gaussian noise. Test hook only.

    Returns:
        A :class:`PlanResult`. Its ``budgets_spent`` equals ``params.split``.
    """
    mat, is_sparse = _as_data(data)
    n, d = mat.shape
    if n == 0:
        raise ValueError("empty dataset")
    if profile.d != d:
        raise ValueError(f"profile has {profile.d} coordinates, data has {d}")
    split = params.split
    if not (split.rho1 > 0 and split.rho2 > 0 and split.rho3 > 0):
        raise ValueError("every part of the budget split must be positive")
    M = float(params.M)
    if is_sparse:
        if M < 1:
            raise ValueError("binary data needs M >= 1")
    else:
        mat = np.clip(mat, -M, M)

    center_variant = params.center_variant or params.quantile_variant
    center_steps = params.center_steps if params.center_steps is not None else params.steps
    mu_tilde = coordinatewise_private_median(mat, M, split.rho1, rng, variant=center_variant,
                                             steps=center_steps, noiseless=noiseless)
    scale = profile.scale_factors(params.p)

    if params.clip_universe is not None:
        universe = float(params.clip_universe)
    elif profile.is_uniform():
        universe = M * math.sqrt(d) * float(scale[0])
    else:
        universe = clip_universe_bound(profile, params.p, params.beta)
    if not universe > 0:
        raise ValueError("clip universe must be positive")

    steps = params.steps if params.steps is not None else default_steps(0.0, universe)
    if params.k == "auto":
        k = math.sqrt(n) + rank_error_bound(steps, params.beta / 3.0, split.rho2, 1)
    else:
        k = float(params.k)
    level = (n - k) / n
    if level < 0:
        raise ValueError(f"clip count k={k:.3g} exceeds the number of rows n={n}")

    norms = np.concatenate([_row_norms((block - mu_tilde) * scale) for block in _blocks(mat, is_sparse)])
    C = float(column_quantiles(norms, level, split.rho2, rng, bounds=(0.0, universe),
                               variant=params.quantile_variant, steps=params.steps,
                               noiseless=noiseless)[0])

    total = np.zeros(d)
    clipped = 0
    for block in _blocks(mat, is_sparse):
        y = (block - mu_tilde) * scale
        block_norms = _row_norms(y)
        clipped += int(np.count_nonzero(block_norms > C))
        total += (y * _shrink_factors(block_norms, C)[:, None]).sum(axis=0)

    noisy = total.copy() if noiseless else gaussian_mechanism(total, 2.0 * C, split.rho3, rng)
    estimate = mu_tilde + (noisy / n) / scale
    noise = ((noisy - total) / n) / scale
    return PlanResult(
        mean_estimate=estimate,
        mu_tilde=mu_tilde,
        clip_radius=C,
        clipped_count=clipped,
        budgets_spent=split,
        k=k,
        noise=noise,
    )


def unscaled_plan(data, params: PlanParams, rng, *, c: float = 1.0, rank_slack: bool = True,
                  noiseless: bool = False) -> PlanResult:
    """PLAN without variance information: all-ones profile and ``k = c sqrt(d / rho)``.

    ``rho`` is the total of ``params.split``. With ``rank_slack`` the
    rank-error bound of the clipping quantile is added to ``k``, as the
    automatic rule does for PLAN; without it a small ``k`` sits inside the
    quantile's rank noise and the radius search overshoots. Without a
    profile the clip radius is searched over ``[0, M sqrt(d)]`` unless
    ``params.clip_universe`` is set.
    """
    mat, _ = _as_data(data)
    d = mat.shape[1]
    k = c * math.sqrt(d / params.split.total)
    if rank_slack:
        universe = params.clip_universe if params.clip_universe is not None else params.M * math.sqrt(d)
        steps = params.steps if params.steps is not None else default_steps(0.0, universe)
        k += rank_error_bound(steps, params.beta / 3.0, params.split.rho2, 1)
    params = replace(params, k=k)
    return plan_mean(data, VarianceProfile.ones(d), params, rng, noiseless=noiseless)


def naive_gaussian_mean(data, clip_radius: float, rho: float, rng, *, noiseless: bool = False) -> np.ndarray:
    """Clip rows to an origin-centred ball, average, and add Gaussian noise.

    Replacing one row moves the clipped average by at most ``2 C / n`` in l2.
    """
    if clip_radius < 0:
        raise ValueError("clip_radius must be non-negative")
    if not rho > 0:
        raise ValueError("rho must be positive")
    mat, is_sparse = _as_data(data)
    n, d = mat.shape
    if n == 0:
        raise ValueError("empty dataset")
    total = np.zeros(d)
    for block in _blocks(mat, is_sparse):
        total += clip_to_radius(block, clip_radius).sum(axis=0)
    average = total / n
    if noiseless:
        return average
    return gaussian_mechanism(average, 2.0 * clip_radius / n, rho, rng)


def plan_estimate(data, M: float, rho: float, rng, *, p: float = 2, family: str = "gaussian",
                  beta: float = 0.05, quantile_variant: str = "em", center_variant: str | None = None,
                  steps: int | None = None, center_steps: int | None = None, policy: str = "quarter", variance_k: int = 1,
                  variance_floor: float | None = None, k: Union[float, str] = "auto",
                  clip_universe: float | None = None) -> PlanResult:
    """End-to-end PLAN that also estimates the variances privately.

    The preprocessing budget ``rho1`` is split 1:3 between recentering and
    variance estimation. Variances come from pairwise differences
    (``family="gaussian"``) or from noisy column frequencies
    (``family="binary"``); the resulting standard deviations are regularised
    by adding their mean before use.

    For binary data recentering defaults to the binary-search quantile: the
    exponential mechanism never returns a tied value, so on 0/1 columns its
    median lands anywhere in ``(-1, 1)``. The search runs
    ``BINARY_CENTER_STEPS`` steps unless ``center_steps`` is given.
    """
    from .variance import estimate_variances, regularize_sigma, variance_estimate_binary

    mat, is_sparse = _as_data(data)
    d = mat.shape[1]
    split = divide_budget(rho, d, policy)
    center_rho = 0.25 * split.rho1
    variance_rho = split.rho1 - center_rho

    if family == "gaussian":
        floor = 1.0 if variance_floor is None else variance_floor
        sigma2 = estimate_variances(mat, M, variance_rho, rng, k=variance_k, variance_floor=floor,
                                    variant=quantile_variant, steps=steps)
    elif family == "binary":
        sigma2 = variance_estimate_binary(mat, variance_rho, rng, variance_floor=variance_floor)
        if center_variant is None:
            center_variant = "binary"
        if center_steps is None:
            center_steps = BINARY_CENTER_STEPS
    else:
        raise ValueError(f"unknown data family {family!r}")

    sigma_hat = regularize_sigma(np.sqrt(sigma2))
    profile = VarianceProfile.from_std(sigma_hat)
    if family == "binary" and clip_universe is None:
        clip_universe = float(np.linalg.norm(sigma_hat ** (2.0 / 3.0)))

    params = PlanParams(
        M=M, split=BudgetSplit(center_rho, split.rho2, split.rho3), p=p, beta=beta,
        quantile_variant=quantile_variant, center_variant=center_variant, k=k,
        clip_universe=clip_universe, steps=steps, center_steps=center_steps,
    )
    result = plan_mean(mat, profile, params, rng)
    result.variance_rho = variance_rho
    return result
