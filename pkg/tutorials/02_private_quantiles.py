"""
Private quantiles
=================

Two mechanisms pick a private quantile from ``[-M, M]``: a noisy binary
search and the exponential mechanism (EM). Their accuracy is measured in
rank error, the number of data points between the answer and the target.
"""

import numpy as np

from planmean import coordinatewise_private_median, priv_quantile, rank_error, rank_error_bound

rng = np.random.default_rng(1)
values = rng.normal(0.0, 10.0, 2000)

# 20 binary-search steps resolve [-1024, 1024] to about 0.002
for variant, kwargs in (("binary", {"steps": 20}), ("em", {})):
    errors = [rank_error(values, priv_quantile(values, 0.5, 1024.0, 1 / 3, rng, variant=variant, **kwargs), 0.5)
              for _ in range(200)]
    print(f"{variant:6s} median rank error {np.median(errors):6.2f}  worst {np.max(errors):6.2f}")

# the high-probability bound for 20 search steps
print("bound:", round(rank_error_bound(20, 0.05, 1 / 3, 1), 2))

# one median per column; the budget is split evenly over columns
data = rng.normal([0.0, 5.0, -3.0], [1.0, 2.0, 0.5], size=(4000, 3))
print("coordinate-wise median:", coordinatewise_private_median(data, 100.0, 1.0, rng).round(2))
