"""
Private variance estimates
==========================

PLAN rescales each coordinate by its estimated variance. The generic
estimator takes a private median of grouped squared pair differences. The
direct estimator reads the 0.841 quantile, which sits near ``mu + sigma``
for Gaussian data.
"""

import numpy as np

from planmean import regularize_sigma, variance_estimate_binary
from planmean.variance import variance_estimate_gaussian_direct, variance_estimate_generic

rng = np.random.default_rng(2)
generic, direct = [], []
for _ in range(50):
    x = rng.normal(10.0, 1.0, 4000)
    generic.append(variance_estimate_generic(x, 100.0, 0.01, rng, k=4, variance_floor=1e-6))
    direct.append(variance_estimate_gaussian_direct(x, 10.0, 100.0, 0.01, rng, variance_floor=1e-6))
print("generic mean relative error:", np.mean(np.abs(np.array(generic) - 1)).round(4))
print("direct  mean relative error:", np.mean(np.abs(np.array(direct) - 1)).round(4))

# binary data: q (1 - q) from noisy column frequencies, floored at d**(-2/5)
bits = (rng.random((5000, 64)) < np.linspace(0.01, 0.5, 64)).astype(float)
est = variance_estimate_binary(bits, 0.5, rng)
print("binary estimates (first 4):", est[:4].round(3))

# adding the mean standard deviation keeps estimates from undershooting
print(regularize_sigma([4.0, 0.0, 0.0, 0.0]))
