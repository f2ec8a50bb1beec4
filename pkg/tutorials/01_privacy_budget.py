"""
Privacy budgets and the Gaussian mechanism
==========================================

Budgets are zCDP parameters ``rho``. They add up under composition and can be
reported as approximate DP.
"""

import numpy as np

from planmean import compose, divide_budget, gaussian_mechanism, zcdp_to_approx_dp

# three releases at 0.1, 0.2 and 0.2 cost 0.5 in total
total = compose([0.1, 0.2, 0.2])
print("total rho:", total.rho)

# the same budget as (epsilon, delta)
print("epsilon at delta=1e-6:", zcdp_to_approx_dp(total.rho, 1e-6).epsilon)

# PLAN spends its budget in three parts: centre, clip radius, noise
split = divide_budget(1.0)
print("centre / radius / noise:", tuple(split))

# the Gaussian mechanism with l2 sensitivity 1 at rho = 0.5 adds unit variance
rng = np.random.default_rng(0)
draws = gaussian_mechanism(np.zeros(100_000), 1.0, 0.5, rng)
print("noise variance:", draws.var().round(3))
