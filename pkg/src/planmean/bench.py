"""Repeated-trial benchmark of PLAN against baselines.

One :class:`ExperimentConfig` describes a grid over dimension ``d``, skew
``alpha`` and budget ``rho``. Each repetition draws one dataset, shared by
every ``rho`` and estimator so comparisons are paired, and every estimator
run gets its own generator derived from the repetition seed.

Rows go to a ``.partial`` file as repetitions finish. The final CSV is
sorted by grid position and is byte-identical across runs with the same
seed. Wall-clock times go to a ``.timing.csv`` sidecar so they do not break
that property.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .data import FAMILIES, GeneratorConfig, generate, load_dense, load_transactions
from .plan import PlanParams, empirical_mean, naive_gaussian_mean, plan_estimate, unscaled_plan
from .privacy import divide_budget

__all__ = [
    "ESTIMATORS",
    "REFERENCES",
    "WORKERS_ENV",
    "ExperimentConfig",
    "ResultRow",
    "SummaryRow",
    "lp_error",
    "repetition_seed",
    "run_experiment",
    "summarize",
    "write_rows",
    "read_rows",
    "write_summary",
    "load_config",
    "PRESETS",
]

ESTIMATORS = ("plan", "unscaled", "naive", "empirical")
REFERENCES = ("statistical-mean", "empirical-mean")
WORKERS_ENV = "PLANMEAN_MAX_WORKERS"


def lp_error(a, b, p: float = 2) -> float:
    """``(sum |a_i - b_i|**p) ** (1/p)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if p < 1:
        raise ValueError("p must be at least 1")
    return float(np.sum(np.abs(a - b) ** p) ** (1.0 / p))


@dataclass(frozen=True)
class ExperimentConfig:
    """A grid of benchmark runs.

    Either ``family`` names a synthetic generator or ``data_path`` points to
    a file (``data_format`` ``"transactions"`` or ``"dense"``; ``data_d`` and
    ``data_M`` override the inferred width and range bound). File data has
    no ground truth, so it needs ``error_reference="empirical-mean"``.
    ``baseline_steps`` is the binary-search depth of the unscaled baseline,
    whose quantiles use ``baseline_variant``.
    """

    name: str
    family: str | None = None
    n: int = 4000
    dims: tuple = (64,)
    alphas: tuple = (0.0,)
    rhos: tuple = (1.0,)
    repetitions: int = 50
    estimators: tuple = ("plan", "unscaled")
    p: float = 2
    error_reference: str = "statistical-mean"
    seed: int = 0
    data_path: str | None = None
    data_format: str = "transactions"
    data_M: float | None = None
    data_d: int | None = None
    plan_variant: str = "em"
    baseline_variant: str = "binary"
    baseline_steps: int = 20
    naive_clip: float | None = None
    density: float = 8.0
    workers: int = 1

    def __post_init__(self):
        for name in ("dims", "alphas", "rhos", "estimators"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if (self.family is None) == (self.data_path is None):
            raise ValueError("give exactly one of family or data_path")
        if self.family is not None and self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.data_path is not None:
            if self.data_format not in ("transactions", "dense"):
                raise ValueError("data_format must be 'transactions' or 'dense'")
            if self.error_reference != "empirical-mean":
                raise ValueError("file data has no ground truth; use error_reference='empirical-mean'")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if not self.rhos or any(not r > 0 for r in self.rhos):
            raise ValueError("rho grid must be non-empty and positive")
        if not self.dims or any(int(d) < 1 for d in self.dims):
            raise ValueError("dims must be positive integers")
        if not self.estimators or any(e not in ESTIMATORS for e in self.estimators):
            raise ValueError(f"estimators must be a non-empty subset of {ESTIMATORS}")
        if self.error_reference not in REFERENCES:
            raise ValueError(f"error_reference must be one of {REFERENCES}")
        if self.p < 1:
            raise ValueError("p must be at least 1")
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def is_binary(self) -> bool:
        return self.family in ("binary", "kosarak-mimic") or (
            self.data_path is not None and self.data_format == "transactions")


@dataclass
class ResultRow:
    config: str
    estimator: str
    rho: float
    d: int
    alpha: float
    rep: int
    seed: int
    error: float
    clip_radius: float = math.nan
    clipped_count: int = -1
    rho_spent: float = math.nan
    status: str = "ok"
    wall_ms: float = field(default=0.0, compare=False)


ROW_FIELDS = [f.name for f in fields(ResultRow) if f.name != "wall_ms"]


@dataclass(frozen=True)
class SummaryRow:
    config: str
    estimator: str
    rho: float
    d: int
    alpha: float
    count: int
    median: float
    mean: float
    p10: float
    p90: float


def repetition_seed(master: int, d_index: int, alpha_index: int, rep: int) -> int:
    """64-bit seed of one repetition; recorded in each row for replay."""
    ss = np.random.SeedSequence([int(master), d_index, alpha_index, rep])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _load_file_dataset(config: ExperimentConfig):
    if config.data_format == "transactions":
        return load_transactions(config.data_path, d=config.data_d)
    return load_dense(config.data_path, M=config.data_M)


def _run_estimator(name, config, dataset, rho, rng):
    d = dataset.d
    binary = config.is_binary
    if name == "empirical":
        return empirical_mean(dataset.rows), math.nan, -1, math.nan
    if name == "naive":
        clip = config.naive_clip if config.naive_clip is not None else dataset.M * math.sqrt(d)
        return naive_gaussian_mean(dataset.rows, clip, rho, rng), clip, -1, rho
    if name == "plan":
        result = plan_estimate(dataset.rows, dataset.M, rho, rng, p=config.p,
                               family="binary" if binary else "gaussian",
                               quantile_variant=config.plan_variant)
    else:
        params = PlanParams(M=dataset.M, split=divide_budget(rho, d), p=config.p,
                            quantile_variant=config.baseline_variant, steps=config.baseline_steps)
        result = unscaled_plan(dataset.rows, params, rng)
    return result.mean_estimate, result.clip_radius, result.clipped_count, result.total_rho


def _run_repetition(config: ExperimentConfig, d_index: int, alpha_index: int, rep: int, dataset=None):
    d = int(config.dims[d_index])
    alpha = float(config.alphas[alpha_index])
    seed = repetition_seed(config.seed, d_index, alpha_index, rep)
    if dataset is None:
        gen = GeneratorConfig(config.family, config.n, d, alpha, density=config.density)
        dataset = generate(gen, np.random.default_rng([seed, 0]))
    if config.error_reference == "statistical-mean":
        reference = dataset.mu
    else:
        reference = empirical_mean(dataset.rows)
    rows = []
    for rho_index, rho in enumerate(config.rhos):
        for est_index, name in enumerate(config.estimators):
            rng = np.random.default_rng([seed, 1, rho_index, est_index])
            start = time.perf_counter()
            try:
                estimate, clip, clipped, spent = _run_estimator(name, config, dataset, rho, rng)
                row = ResultRow(config.name, name, float(rho), dataset.d, alpha, rep, seed,
                                lp_error(estimate, reference, config.p), float(clip), int(clipped), float(spent))
            except (ValueError, ArithmeticError) as exc:
                row = ResultRow(config.name, name, float(rho), dataset.d, alpha, rep, seed, math.nan,
                                status=f"error: {exc}")
            row.wall_ms = (time.perf_counter() - start) * 1000.0
            rows.append(row)
    return rows


def _max_workers(config: ExperimentConfig) -> int:
    workers = max(1, int(config.workers))
    cap = os.environ.get(WORKERS_ENV)
    if cap:
        workers = min(workers, max(1, int(cap)))
    return workers


def _sort_key(config: ExperimentConfig):
    order = {name: i for i, name in enumerate(config.estimators)}
    return lambda r: (r.config, r.d, r.alpha, r.rho, r.rep, order.get(r.estimator, len(order)))


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _append(path: Path, rows, header: bool):
    with open(path, "a", newline="") as handle:
        writer = csv.writer(handle)
        if header:
            writer.writerow(ROW_FIELDS)
        for row in rows:
            writer.writerow([_format(getattr(row, name)) for name in ROW_FIELDS])


def run_experiment(config: ExperimentConfig, out: str | os.PathLike | None = None) -> list[ResultRow]:
    """Run every (d, alpha, repetition, rho, estimator) combination of ``config``.

    Estimator failures such as an infeasible clip count become rows with
    ``status`` starting with ``"error"`` and a NaN error; the run continues.
    When ``out`` is given, rows are also written there as CSV together with
    ``<stem>.timing.csv`` and a summary ``<stem>.summary.csv``.
    """
    file_dataset = _load_file_dataset(config) if config.data_path is not None else None
    if file_dataset is not None:
        config = replace(config, dims=(file_dataset.d,), alphas=(0.0,))
    tasks = [(di, ai, rep) for di in range(len(config.dims)) for ai in range(len(config.alphas))
             for rep in range(config.repetitions)]

    partial = None
    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        partial = out.with_name(out.name + ".partial")
        partial.unlink(missing_ok=True)

    rows: list[ResultRow] = []
    workers = _max_workers(config)

    def collect(batch):
        if partial is not None:
            _append(partial, batch, header=not rows)
        rows.extend(batch)

    if workers == 1:
        for task in tasks:
            collect(_run_repetition(config, *task, dataset=file_dataset))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_repetition, config, *task, dataset=file_dataset) for task in tasks]
            for future in futures:
                collect(future.result())

    rows.sort(key=_sort_key(config))
    if out is not None:
        write_rows(rows, out)
        write_summary(summarize(rows), out.with_name(out.stem + ".summary.csv"))
        partial.unlink(missing_ok=True)
    return rows


def write_rows(rows, path) -> None:
    path = Path(path)
    path.unlink(missing_ok=True)
    _append(path, rows, header=True)
    timing = path.with_name(path.stem + ".timing.csv")
    with open(timing, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["config", "estimator", "rho", "d", "alpha", "rep", "wall_ms"])
        for r in rows:
            writer.writerow([r.config, r.estimator, repr(r.rho), r.d, repr(r.alpha), r.rep, f"{r.wall_ms:.3f}"])


def read_rows(path) -> list[ResultRow]:
    converters = {"rho": float, "d": int, "alpha": float, "rep": int, "seed": int, "error": float,
                  "clip_radius": float, "clipped_count": int, "rho_spent": float}
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        missing = set(ROW_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        return [ResultRow(**{k: converters.get(k, str)(v) for k, v in rec.items() if k in ROW_FIELDS})
                for rec in reader]


def summarize(rows) -> list[SummaryRow]:
    """Median, mean and 10th/90th percentiles of the error per (config, estimator, rho, d, alpha).

    Rows whose error is NaN (failed runs) are left out of the statistics.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("nothing to summarise")
    groups: dict[tuple, list[float]] = {}
    for r in rows:
        key = (r.config, r.estimator, r.rho, r.d, r.alpha)
        groups.setdefault(key, [])
        if not math.isnan(r.error):
            groups[key].append(r.error)
    out = []
    for key in sorted(groups):
        errors = np.asarray(groups[key])
        if errors.size == 0:
            stats = (math.nan,) * 4
        else:
            stats = (float(np.median(errors)), float(errors.mean()),
                     float(np.percentile(errors, 10)), float(np.percentile(errors, 90)))
        out.append(SummaryRow(*key, int(errors.size), *stats))
    return out


def write_summary(summary, path) -> None:
    names = [f.name for f in fields(SummaryRow)]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(names)
        for s in summary:
            writer.writerow([_format(getattr(s, name)) for name in names])


PRESETS = {
    "gaussianA": ExperimentConfig("gaussianA", family="gaussianA", n=4000, dims=(16, 32, 64, 128, 256, 512),
                                  rhos=(1.0, 0.5, 0.125)),
    "gaussianB": ExperimentConfig("gaussianB", family="gaussianB", n=10000, dims=(256,),
                                  alphas=(0.0, 0.5, 1.0, 1.5, 2.0), rhos=(1.0, 0.5, 0.125)),
    "gaussianC": ExperimentConfig("gaussianC", family="gaussianC", n=10000, dims=(16, 32, 64, 128, 256, 512),
                                  alphas=(2.0,), rhos=(1.0, 0.5, 0.125), error_reference="empirical-mean"),
    "binary": ExperimentConfig("binary", family="binary", n=4096, dims=(256, 512),
                               alphas=(0.0, 0.125, 0.25, 0.5, 1.0), rhos=(1.0, 0.5, 0.125), p=1),
    "kosarak-mimic": ExperimentConfig("kosarak-mimic", family="kosarak-mimic", n=10000, dims=(1024,),
                                      rhos=(1.0, 0.5, 0.25, 0.125, 0.0625), p=1,
                                      error_reference="empirical-mean"),
}


def load_config(path=None, *, preset: str | None = None, **overrides) -> ExperimentConfig:
    """Build a config from a JSON file, a preset name, or both (file keys win).

    Unknown keys are rejected. ``overrides`` with value ``None`` are ignored.
    """
    base = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ValueError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        base = asdict(PRESETS[preset])
    if path is not None:
        with open(path) as handle:
            try:
                doc = json.load(handle)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise ValueError(f"{path}: top level must be an object")
        if "preset" in doc:
            name = doc.pop("preset")
            if name not in PRESETS:
                raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
            base = {**asdict(PRESETS[name]), **base}
        base.update(doc)
    base.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(base) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "name" not in base:
        raise ValueError("config needs a 'name'")
    try:
        return ExperimentConfig(**base)
    except TypeError as exc:
        raise ValueError(str(exc)) from None
