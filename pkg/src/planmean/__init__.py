"""Variance-aware private mean estimation under zero-concentrated differential privacy.

The main entry points are :func:`plan_mean` (PLAN with a known variance
profile), :func:`plan_estimate` (PLAN including private variance
estimation) and :func:`unscaled_plan` (the baseline that ignores variances).
"""

from .allocation import (SensitivityProfile, expected_pth_moment, gaussian_abs_moment, optimal_moment,
                         optimal_scaling)
from .bench import ExperimentConfig, ResultRow, lp_error, run_experiment, summarize
from .concentration import ConcentrationReport, bernstein_bound, chernoff_hoeffding_bound, tail_check
from .data import (Dataset, GeneratorConfig, bernoulli_dataset, gen_binary, gen_gaussian, generate, kosarak_mimic,
                   load_dense, load_transactions, save_transactions)
from .plan import (PlanParams, PlanResult, VarianceProfile, clip_to_radius, empirical_mean, naive_gaussian_mean,
                   plan_estimate, plan_mean, unscaled_plan)
from .privacy import (ApproxDPParams, BudgetSplit, PrivacyBudget, compose, divide_budget, gaussian_mechanism,
                      make_rng, zcdp_to_approx_dp)
from .quantile import (coordinatewise_private_median, priv_quantile, priv_quantile_binary, priv_quantile_em,
                       rank_error, rank_error_bound)
from .variance import (regularize_sigma, variance_estimate_binary, variance_estimate_gaussian_direct,
                       variance_estimate_generic)

__version__ = "0.1.0"
