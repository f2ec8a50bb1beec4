"""
Checking tail assumptions
=========================

The analysis assumes deviations from the mean have exponentially decaying
tails. ``tail_check`` measures exceedance fractions over a grid of ``t`` and
fits the decay rate.
"""

import numpy as np

from planmean import GeneratorConfig, generate, tail_check

ds = generate(GeneratorConfig("gaussianB", 50_000, 16, 2.0), np.random.default_rng(4))
report = tail_check(ds.rows, ds.mu, np.sqrt(ds.sigma2), t_grid=np.linspace(1, 3, 9))
for t, raw, scaled, flagged in report.rows():
    print(f"t={t:.2f} raw={raw:.4f} scaled={scaled:.4f}")
print("slopes:", round(report.raw_slope, 3), round(report.scaled_slope, 3), "passed:", report.passed)
