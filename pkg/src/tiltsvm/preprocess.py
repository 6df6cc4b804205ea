"""Feature standardization and stratified holdout splitting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tiltsvm.dataset import Dataset
from tiltsvm.errors import InvalidConfigError, InvalidInputError

__all__ = [
    "Dataset",
    "StandardizerParams",
    "SplitConfig",
    "fit_standardizer",
    "transform",
    "standardize_array",
    "stratified_split",
    "split_quotas",
]


@dataclass(frozen=True, eq=False)
class StandardizerParams:
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self) -> None:
        mu = np.array(self.mu, dtype=np.float64, copy=True)
        sigma = np.array(self.sigma, dtype=np.float64, copy=True)
        if mu.ndim != 1 or mu.shape != sigma.shape:
            raise InvalidInputError("mu and sigma must be 1-D vectors of equal length")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
            raise InvalidInputError("standardizer parameters must be finite")
        if np.any(sigma < 0):
            raise InvalidInputError("sigma components must be >= 0")
        mu.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def p(self) -> int:
        return self.mu.shape[0]

    def to_dict(self) -> dict:
        return {"mu": [float(v) for v in self.mu], "sigma": [float(v) for v in self.sigma]}

    @classmethod
    def from_dict(cls, d: dict) -> "StandardizerParams":
        return cls(np.asarray(d["mu"], dtype=float), np.asarray(d["sigma"], dtype=float))


@dataclass(frozen=True)
class SplitConfig:
    test_fraction: float = 0.3
    seed: int = 0

    def __post_init__(self) -> None:
        f = self.test_fraction
        if not (isinstance(f, (int, float)) and math.isfinite(f) and 0.0 < f < 1.0):
            raise InvalidConfigError(f"test_fraction must lie in (0, 1), got {f!r}")


def fit_standardizer(d: Dataset) -> StandardizerParams:
    """Per-column mean and population (divide-by-N) standard deviation."""
    x = np.asarray(d.features if isinstance(d, Dataset) else d, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise InvalidInputError("cannot fit a standardizer on an empty dataset")
    mu = x.mean(axis=0)
    sigma = np.sqrt(((x - mu) ** 2).mean(axis=0))
    return StandardizerParams(mu, sigma)


def standardize_array(s: StandardizerParams, x: np.ndarray) -> np.ndarray:
    """Apply ``(x - mu) / sigma`` to a vector or row matrix.

    Columns with ``sigma == 0`` map to 0.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != s.p:
        raise InvalidInputError(f"expected {s.p} features, got {x.shape[-1]}")
    safe = np.where(s.sigma > 0, s.sigma, 1.0)
    out = (x - s.mu) / safe
    return np.where(s.sigma > 0, out, 0.0)


def transform(s: StandardizerParams, d: Dataset) -> Dataset:
    if d.p != s.p:
        raise InvalidInputError(f"dataset has {d.p} features, standardizer expects {s.p}")
    return d.with_features(standardize_array(s, d.features))


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_quotas(counts: dict[int, int], test_fraction: float) -> dict[int, int]:
    """Per-class test counts by the largest-remainder method.

    The global test size is ``round(N * test_fraction)`` (halves round up).
    Class ``c`` is entitled to ``n_c * T / N`` rows; each class first gets
    the floor of its entitlement, and leftover rows go to the largest
    fractional remainders, ties to the smaller class id.
    """
    cls = sorted(counts)
    total = sum(counts[c] for c in cls)
    target = _round_half_up(total * test_fraction)
    # integer arithmetic: entitlement = n_c * target / total
    floors = {c: (counts[c] * target) // total for c in cls}
    rema = {c: (counts[c] * target) % total for c in cls}
    left = target - sum(floors.values())
    for c in sorted(cls, key=lambda c: (-rema[c], c))[:left]:
        floors[c] += 1
    return floors


def stratified_split(d: Dataset, cfg: SplitConfig) -> tuple[Dataset, Dataset]:
    """Split ``d`` into ``(train, test)`` preserving class proportions.

    Within each class (ascending id) rows are shuffled with one Philox
    generator seeded by ``cfg.seed``; the first ``quota`` rows go to test.
    Both parts keep the original row order.
    """
    labels = d.labels
    classes, counts = np.unique(labels, return_counts=True)
    quotas = split_quotas(dict(zip(classes.tolist(), counts.tolist())), cfg.test_fraction)
    n_test = sum(quotas.values())
    if n_test == 0 or n_test == d.n:
        raise InvalidInputError(
            f"test fraction {cfg.test_fraction} of {d.n} rows leaves an empty train or test set"
        )
    rng = np.random.Generator(np.random.Philox(key=int(cfg.seed) & ((1 << 64) - 1)))
    is_test = np.zeros(d.n, dtype=bool)
    for c in classes.tolist():
        rows = np.flatnonzero(labels == c)
        perm = rng.permutation(rows.shape[0])
        is_test[rows[perm[: quotas[c]]]] = True
    return d.subset(np.flatnonzero(~is_test)), d.subset(np.flatnonzero(is_test))
