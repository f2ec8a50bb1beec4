"""
Sharing noise across queries
============================

For queries with sensitivities ``Delta_i`` answered with one Gaussian draw,
scaling query ``i`` by ``Delta_i ** (2 / (p + 2))`` minimises the expected
``p``-th moment of the error.
"""

import numpy as np

from planmean import SensitivityProfile, expected_pth_moment, optimal_moment, optimal_scaling

profile = SensitivityProfile([4.0, 1.0], p=2)
s = optimal_scaling(profile)
print("scaling:", s.round(3))
print("optimal moment:", optimal_moment(profile, 1.0))
print("uniform moment:", expected_pth_moment(profile, np.ones(2), 1.0))

# no random scaling does better
rng = np.random.default_rng(3)
trials = [expected_pth_moment(profile, t, 1.0) for t in rng.lognormal(0, 1, (1000, 2))]
print("best of 1000 random scalings:", round(min(trials), 4))
