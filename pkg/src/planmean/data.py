"""Synthetic generators and file loaders for the benchmark datasets.

Gaussian families:

* ``gaussianA``: ``N(0, I)`` with ``M = sqrt(50) d``.
* ``gaussianB``: mean 10 per coordinate, variances ``(d / (d - i + 1)) ** alpha``
  for ``i = 1..d`` and ``M = 100 d max(sigma)``.
* ``gaussianC``: same as B with ``alpha = 2`` by default; benchmarks measure it
  against the empirical mean.

``binary`` draws independent bits: the first ``ceil(alpha d)`` coordinates
are fair coins and the rest fire with probability 0.01. Binary data is stored
as ``scipy.sparse.csr_matrix``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

__all__ = [
    "FAMILIES",
    "Dataset",
    "GeneratorConfig",
    "gaussian_variances",
    "gen_gaussian",
    "gen_binary",
    "bernoulli_dataset",
    "kosarak_mimic",
    "generate",
    "load_transactions",
    "save_transactions",
    "load_dense",
]

FAMILIES = ("gaussianA", "gaussianB", "gaussianC", "binary", "kosarak-mimic")
HIGH_Q = 0.5
LOW_Q = 0.01


@dataclass(frozen=True)
class Dataset:
    """An ``(n, d)`` sample with its range bound and, for synthetic data, the true moments."""

    rows: object
    M: float
    mu: np.ndarray | None = None
    sigma2: np.ndarray | None = None

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("M must be positive")
        if sparse.issparse(self.rows):
            rows = sparse.csr_matrix(self.rows, dtype=float)
            if rows.nnz and np.any(rows.data != 1):
                raise ValueError("sparse datasets must hold 0/1 entries")
            if self.M < 1:
                raise ValueError("binary datasets need M >= 1")
        else:
            rows = np.asarray(self.rows, dtype=float)
            if rows.ndim != 2:
                raise ValueError("rows must be an (n, d) matrix")
            if rows.size and np.max(np.abs(rows)) > self.M:
                raise ValueError("entries must lie in [-M, M]")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.rows)

    def dense(self) -> np.ndarray:
        return self.rows.toarray() if self.is_sparse else self.rows


@dataclass(frozen=True)
class GeneratorConfig:
    family: str
    n: int
    d: int
    alpha: float | None = None
    density: float = 8.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown generator family {self.family!r}; expected one of {FAMILIES}")
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")

    @property
    def resolved_alpha(self) -> float:
        if self.alpha is not None:
            return float(self.alpha)
        return {"gaussianA": 0.0, "gaussianB": 1.0, "gaussianC": 2.0, "binary": 0.125}.get(self.family, 0.0)


def gaussian_variances(d: int, alpha: float) -> np.ndarray:
    """``sigma_i**2 = (d / (d - i + 1)) ** alpha`` for ``i = 1..d``; increasing, first entry 1."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    i = np.arange(1, d + 1, dtype=float)
    return (d / (d - i + 1.0)) ** alpha


def gen_gaussian(config: GeneratorConfig, rng) -> Dataset:
    d = config.d
    if config.family == "gaussianA":
        sigma2 = np.ones(d)
        mu = np.zeros(d)
        M = math.sqrt(50.0) * d
    elif config.family in ("gaussianB", "gaussianC"):
        sigma2 = gaussian_variances(d, config.resolved_alpha)
        mu = np.full(d, 10.0)
        M = 100.0 * d * math.sqrt(sigma2.max())
    else:
        raise ValueError(f"{config.family!r} is not a Gaussian family")
    rows = mu + np.sqrt(sigma2) * rng.standard_normal((config.n, d))
    return Dataset(np.clip(rows, -M, M), M, mu, sigma2)


def _bernoulli_csr(q: np.ndarray, n: int, rng, block: int = 4096) -> sparse.csr_matrix:
    parts = []
    for start in range(0, n, block):
        rows = min(block, n - start)
        parts.append(sparse.csr_matrix(rng.random((rows, q.size)) < q, dtype=float))
    return sparse.vstack(parts, format="csr")


def bernoulli_dataset(q, n: int, rng) -> Dataset:
    """Independent bits with per-coordinate probabilities ``q``."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if q.ndim != 1 or np.any((q < 0) | (q > 1)):
        raise ValueError("probabilities must form a vector in [0, 1]")
    return Dataset(_bernoulli_csr(q, n, rng), 1.0, q, q * (1.0 - q))


def gen_binary(config: GeneratorConfig, rng) -> Dataset:
    alpha = config.resolved_alpha
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1] for binary data")
    high = math.ceil(alpha * config.d)
    q = np.full(config.d, LOW_Q)
    q[:high] = HIGH_Q
    return bernoulli_dataset(q, config.n, rng)


def kosarak_mimic(config: GeneratorConfig, rng) -> Dataset:
    """Click-stream stand-in: independent items with Zipf-like popularity.

    Item ``i`` (1-based) fires with probability ``min(0.5, c / i)``, with
    ``c`` chosen so a row holds ``config.density`` items on average.
    """
    ranks = np.arange(1, config.d + 1, dtype=float)
    lo, hi = 0.0, float(config.d)
    for _ in range(100):
        c = (lo + hi) / 2.0
        if np.minimum(0.5, c / ranks).sum() < config.density:
            lo = c
        else:
            hi = c
    return bernoulli_dataset(np.minimum(0.5, lo / ranks), config.n, rng)


def generate(config: GeneratorConfig, rng) -> Dataset:
    if config.family == "binary":
        return gen_binary(config, rng)
    if config.family == "kosarak-mimic":
        return kosarak_mimic(config, rng)
    return gen_gaussian(config, rng)


def load_transactions(path, d: int | None = None) -> Dataset:
    """Read a transaction file: one user per line, whitespace-separated 1-based item ids.

    Repeated ids on a line set a single bit. Blank lines give all-zero rows.
    ``d`` defaults to the largest id seen.
    """
    indptr = [0]
    indices: list[int] = []
    largest = 0
    with open(path, "r", encoding="ascii") as handle:
        for lineno, line in enumerate(handle, start=1):
            items = set()
            for token in line.split():
                if not token.isdigit():
                    raise ValueError(f"{path}:{lineno}: item id {token!r} is not a positive integer")
                item = int(token)
                if item < 1:
                    raise ValueError(f"{path}:{lineno}: item ids start at 1, got {item}")
                if d is not None and item > d:
                    raise ValueError(f"{path}:{lineno}: item id {item} exceeds d={d}")
                items.add(item - 1)
            largest = max(largest, max(items, default=-1) + 1)
            indices.extend(sorted(items))
            indptr.append(len(indices))
    width = largest if d is None else d
    data = np.ones(len(indices))
    rows = sparse.csr_matrix((data, np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
                             shape=(len(indptr) - 1, max(width, 1)))
    return Dataset(rows, 1.0)


def save_transactions(dataset: Dataset, path) -> None:
    """Write a binary dataset in the transaction format read by :func:`load_transactions`."""
    rows = sparse.csr_matrix(dataset.rows)
    rows.sum_duplicates()
    with open(path, "w", encoding="ascii") as handle:
        for i in range(rows.shape[0]):
            cols = rows.indices[rows.indptr[i]:rows.indptr[i + 1]]
            handle.write(" ".join(str(int(c) + 1) for c in np.sort(cols)) + "\n")


def load_dense(path, M: float | None = None, delimiter: str | None = None) -> Dataset:
    """Load a delimited numeric text file, one row per line.

    Without ``M`` the range bound is the largest absolute entry (or 1 for all-zero data).
    """
    rows = np.loadtxt(Path(path), delimiter=delimiter, ndmin=2, dtype=float)
    if M is None:
        M = float(np.max(np.abs(rows))) if rows.size else 1.0
        M = M if M > 0 else 1.0
    return Dataset(rows, float(M))
