"""
Running a benchmark grid
========================

``run_experiment`` sweeps dimension, skew and budget with paired repetitions
and writes a results CSV plus a summary. The ``planmean run`` command does the
same from a JSON config.
"""

import tempfile
from pathlib import Path

from planmean import ExperimentConfig, run_experiment, summarize

config = ExperimentConfig("demo", family="binary", n=4096, dims=(256,), alphas=(0.0, 0.5), rhos=(1.0,),
                          repetitions=5, p=1, estimators=("plan", "unscaled", "empirical"))
with tempfile.TemporaryDirectory() as tmp:
    rows = run_experiment(config, Path(tmp) / "demo.csv")
    print(sorted(p.name for p in Path(tmp).iterdir()))

for s in summarize(rows):
    print(f"{s.estimator:9s} alpha={s.alpha:<4} median l1 error {s.median:.4f}")
