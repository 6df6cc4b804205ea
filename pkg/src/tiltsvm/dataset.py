"""Immutable labeled feature matrix and its CSV representation."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from tiltsvm._format import atomic_write_text, fmt_float
from tiltsvm.errors import InvalidInputError

SENSOR_COLUMNS = ("ax", "ay", "az", "gx", "gy", "gz", "mx", "my", "mz")
LABEL_COLUMN = "label"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix, integer class labels and column names.

    Arrays are copied on construction and marked read-only, so a dataset can
    be shared freely between threads.
    """

    features: np.ndarray
    labels: np.ndarray
    column_names: tuple[str, ...] = field(default=SENSOR_COLUMNS)

    def __post_init__(self) -> None:
        x = np.asarray(self.features, dtype=np.float64)
        if x.ndim != 2:
            raise InvalidInputError(f"features must be 2-D, got shape {x.shape}")
        if x.shape[0] < 1:
            raise InvalidInputError("dataset must contain at least one row")
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("features contain NaN or Inf")
        y = np.asarray(self.labels)
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise InvalidInputError(
                f"labels must be 1-D of length {x.shape[0]}, got shape {y.shape}"
            )
        if y.dtype.kind == "f":
            if not np.all(np.isfinite(y)) or np.any(y != np.round(y)):
                raise InvalidInputError("labels must be integers")
        elif y.dtype.kind not in "iu":
            raise InvalidInputError("labels must be integers")
        y = y.astype(np.int64)
        if np.any(y < 0):
            raise InvalidInputError("labels must be non-negative class ids")
        names = tuple(str(c) for c in self.column_names)
        if len(names) != x.shape[1]:
            raise InvalidInputError(
                f"{len(names)} column names for {x.shape[1]} feature columns"
            )
        object.__setattr__(self, "features", _frozen(x))
        object.__setattr__(self, "labels", _frozen(y))
        object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.labels)

    def subset(self, index: Sequence[int] | np.ndarray) -> "Dataset":
        index = np.asarray(index, dtype=np.int64)
        return Dataset(self.features[index], self.labels[index], self.column_names)

    def with_features(self, features: np.ndarray) -> "Dataset":
        return Dataset(features, self.labels, self.column_names)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.column_names + (LABEL_COLUMN,)) + "\n")
        for row, label in zip(self.features, self.labels):
            buf.write(",".join(fmt_float(v) for v in row))
            buf.write(f",{int(label)}\n")
        return buf.getvalue()

    def write_csv(self, path: str | os.PathLike) -> None:
        atomic_write_text(path, self.to_csv())


def read_csv(path: str | os.PathLike, require_label: bool = True) -> Dataset:
    """Load a dataset CSV (header row, feature columns, trailing ``label``).

    With ``require_label=False`` a file without a ``label`` column is
    accepted and every label is set to 0.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidInputError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    has_label = bool(header) and header[-1] == LABEL_COLUMN
    if require_label and not has_label:
        raise InvalidInputError(f"{path}: last column must be '{LABEL_COLUMN}'")
    names = header[:-1] if has_label else header
    body = [r for r in rows[1:] if r]
    if not body:
        raise InvalidInputError(f"{path}: no data rows")
    width = len(header)
    feats = np.empty((len(body), len(names)))
    labels = np.zeros(len(body), dtype=np.int64)
    for n, r in enumerate(body):
        if len(r) != width:
            raise InvalidInputError(f"{path}: row {n + 2} has {len(r)} fields, expected {width}")
        try:
            feats[n] = [float(v) for v in r[: len(names)]]
            if has_label:
                labels[n] = int(r[-1])
        except ValueError as exc:
            raise InvalidInputError(f"{path}: row {n + 2}: {exc}") from None
    return Dataset(feats, labels, tuple(names))
