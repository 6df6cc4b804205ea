"""Accuracy, validation curves over C / gamma / degree, and optimum selection."""

from __future__ import annotations

import dataclasses
import io
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from tiltsvm._format import atomic_write_text, fmt_acc
from tiltsvm.dataset import Dataset
from tiltsvm.errors import InvalidConfigError, InvalidInputError, NoResultError
from tiltsvm.svm import KernelSpec, MulticlassModel, TrainConfig, train_multiclass

log = logging.getLogger(__name__)

PARAM_NAMES = ("c", "gamma", "degree")

DEFAULT_GRIDS: dict[str, tuple[float, ...]] = {
    "c": (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0, 10000.0),
    "gamma": (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0),
    "degree": (1, 2, 3, 4, 5),
}

CURVE_HEADER = "param_name,param_value,train_accuracy,validation_accuracy,converged"

# validation accuracy this far below the best marks under/overfit regions
REGION_MARGIN = 0.01


@dataclass(frozen=True)
class ParamAxis:
    name: str
    grid: tuple[float, ...]

    def __post_init__(self) -> None:
        name = str(self.name).lower()
        if name not in PARAM_NAMES:
            raise InvalidConfigError(f"unknown parameter {self.name!r}; expected one of {PARAM_NAMES}")
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise InvalidConfigError("grid must not be empty")
        if any(not (math.isfinite(v) and v > 0) for v in grid):
            raise InvalidConfigError("grid values must be finite and > 0")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidConfigError("grid must be strictly ascending")
        if name == "degree":
            if any(v != int(v) for v in grid):
                raise InvalidConfigError("degree grid values must be integers")
            grid = tuple(int(v) for v in grid)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "grid", grid)

    @classmethod
    def default(cls, name: str) -> "ParamAxis":
        return cls(name, DEFAULT_GRIDS[str(name).lower()])

    @property
    def log_scale(self) -> bool:
        return self.name != "degree"


@dataclass(frozen=True, eq=False)
class CurvePoint:
    param_value: float
    train_accuracy: float = float("nan")
    validation_accuracy: float = float("nan")
    converged: bool = False
    error: str | None = None
    model: MulticlassModel | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True, eq=False)
class ValidationCurve:
    axis: ParamAxis
    kernel: KernelSpec
    config: TrainConfig
    points: tuple[CurvePoint, ...]

    def successful(self) -> list[CurvePoint]:
        return [p for p in self.points if not p.failed]

    def point(self, value: float) -> CurvePoint:
        for p in self.points:
            if p.param_value == value:
                return p
        raise KeyError(value)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CURVE_HEADER + "\n")
        for p in self.points:
            if p.failed:
                tr = va = ""
            else:
                tr, va = fmt_acc(p.train_accuracy), fmt_acc(p.validation_accuracy)
            conv = "true" if p.converged and not p.failed else "false"
            buf.write(f"{self.axis.name},{float(p.param_value)!r},{tr},{va},{conv}\n")
        return buf.getvalue()

    def write_csv(self, path: str | os.PathLike) -> None:
        atomic_write_text(path, self.to_csv())


@dataclass(frozen=True)
class SelectionResult:
    best_value: float
    best_validation_accuracy: float
    underfit_region: tuple[float, ...]
    overfit_region: tuple[float, ...]


def accuracy(m: MulticlassModel, d: Dataset) -> float:
    """Fraction of rows of ``d`` whose predicted class equals the label."""
    if d.n == 0:
        raise InvalidInputError("accuracy of an empty dataset is undefined")
    if d.p != m.standardizer.p:
        raise InvalidInputError(f"dataset has {d.p} features, model expects {m.standardizer.p}")
    return float(np.count_nonzero(m.predict_many(d.features) == d.labels)) / d.n


def _override(k: KernelSpec, cfg: TrainConfig, name: str, value) -> tuple[KernelSpec, TrainConfig]:
    if name == "c":
        return k, dataclasses.replace(cfg, c=float(value))
    if name == "gamma":
        return dataclasses.replace(k, gamma=float(value)), cfg
    return dataclasses.replace(k, degree=int(value)), cfg


def _eval_point(train: Dataset, test: Dataset, k: KernelSpec, cfg: TrainConfig, name: str, value) -> CurvePoint:
    try:
        k2, cfg2 = _override(k, cfg, name, value)
        m = train_multiclass(train, k2, cfg2)
        return CurvePoint(value, accuracy(m, train), accuracy(m, test), m.converged, None, m)
    except Exception as exc:  # a failed grid point must not abort the sweep
        log.warning("grid point %s=%s failed: %s", name, value, exc)
        return CurvePoint(value, error=f"{type(exc).__name__}: {exc}")


def validation_curve(
    train: Dataset,
    test: Dataset,
    k: KernelSpec,
    cfg: TrainConfig,
    axis: ParamAxis,
    jobs: int = 1,
) -> ValidationCurve:
    """Train at every grid value of ``axis`` and score on ``train`` and ``test``.

    Everything except the swept parameter is held at ``k`` / ``cfg``.  A grid
    point whose training raises is recorded as failed and the sweep goes on.
    Points are independent; with ``jobs > 1`` they run on a thread pool and
    are reassembled in grid order.
    """
    if axis.name == "gamma" and k.family == "linear":
        raise InvalidConfigError("the linear kernel has no gamma parameter")
    if axis.name == "degree" and k.family != "polynomial":
        raise InvalidConfigError("degree applies to the polynomial kernel only")
    if train.p != test.p:
        raise InvalidInputError("train and test feature counts differ")

    def run(v):
        p = _eval_point(train, test, k, cfg, axis.name, v)
        log.info(
            "%s=%g train=%.4f validation=%.4f converged=%s",
            axis.name, v, p.train_accuracy, p.validation_accuracy, p.converged,
        )
        return p

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(run, axis.grid))
    else:
        points = [run(v) for v in axis.grid]
    return ValidationCurve(axis, k, cfg, tuple(points))


def select_optimal(curve: ValidationCurve | Sequence[CurvePoint]) -> SelectionResult:
    """Grid value with the highest validation accuracy.

    Ties go to the smaller parameter value.  ``underfit_region`` is the
    longest run of leading points, and ``overfit_region`` the longest run of
    trailing points, whose validation accuracy is more than 0.01 below the
    best.
    """
    points = curve.successful() if isinstance(curve, ValidationCurve) else [p for p in curve if not p.failed]
    if not points:
        raise NoResultError("no successful grid points to select from")
    points = sorted(points, key=lambda p: p.param_value)
    best = points[0]
    for p in points[1:]:
        if p.validation_accuracy > best.validation_accuracy:
            best = p
    floor = best.validation_accuracy - REGION_MARGIN

    def run_below(seq):
        out = []
        for p in seq:
            if p.validation_accuracy >= floor:
                break
            out.append(p.param_value)
        return out

    under = run_below(points)
    over = run_below(reversed(points))[::-1]
    return SelectionResult(best.param_value, best.validation_accuracy, tuple(under), tuple(over))
