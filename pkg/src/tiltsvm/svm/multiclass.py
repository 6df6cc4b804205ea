"""One-vs-rest multiclass SVM over standardized features, plus JSON I/O."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from tiltsvm._format import atomic_write_text, dumps_json
from tiltsvm.dataset import Dataset
from tiltsvm.errors import InvalidInputError, TiltSvmError
from tiltsvm.preprocess import StandardizerParams, fit_standardizer, standardize_array
from tiltsvm.svm.kernels import KernelSpec, gram_matrix
from tiltsvm.svm.smo import SvmBinaryModel, TrainConfig, smo_train

FORMAT_VERSION = 1


class ClassTrainingError(TiltSvmError):
    """Training of one binary classifier failed; ``class_id`` names it."""

    def __init__(self, class_id: int, cause: Exception):
        super().__init__(f"training one-vs-rest classifier for class {class_id} failed: {cause}")
        self.class_id = class_id
        self.cause = cause


@dataclass(frozen=True, eq=False)
class MulticlassModel:
    binaries: tuple[SvmBinaryModel, ...]
    class_ids: tuple[int, ...]
    standardizer: StandardizerParams
    c: float = float("nan")

    def __post_init__(self) -> None:
        if len(self.binaries) != len(self.class_ids):
            raise InvalidInputError("one binary model per class is required")
        if list(self.class_ids) != sorted(set(self.class_ids)):
            raise InvalidInputError("class_ids must be strictly ascending")
        if len({b.kernel for b in self.binaries}) > 1:
            raise InvalidInputError("all binaries must share one kernel")

    @property
    def kernel(self) -> KernelSpec:
        return self.binaries[0].kernel

    @property
    def converged(self) -> bool:
        return all(b.converged for b in self.binaries)

    def decision_matrix(self, X_std: np.ndarray) -> np.ndarray:
        """``(N, n_classes)`` raw decision values for standardized rows."""
        return np.column_stack([b.decision_values(X_std) for b in self.binaries])

    def predict_standardized(self, X_std) -> np.ndarray:
        X_std = np.asarray(X_std, dtype=np.float64)
        if X_std.ndim != 2 or X_std.shape[1] != self.standardizer.p:
            raise InvalidInputError(f"expected rows with {self.standardizer.p} features")
        # argmax takes the first maximum, i.e. the lowest class id
        return np.asarray(self.class_ids)[np.argmax(self.decision_matrix(X_std), axis=1)]

    def predict_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise InvalidInputError(f"expected a 2-D matrix, got shape {X.shape}")
        return self.predict_standardized(standardize_array(self.standardizer, X))

    def to_dict(self) -> dict:
        k = self.kernel
        return {
            "format_version": FORMAT_VERSION,
            "kernel": k.to_dict(),
            "c": float(self.c),
            "classes": [int(c) for c in self.class_ids],
            "binaries": [
                {"class": int(c), **b.to_dict()} for c, b in zip(self.class_ids, self.binaries)
            ],
            "standardizer": self.standardizer.to_dict(),
        }

    def to_json(self) -> str:
        return dumps_json(self.to_dict())

    def save(self, path: str | os.PathLike) -> None:
        atomic_write_text(path, self.to_json())

    @classmethod
    def from_dict(cls, d: dict) -> "MulticlassModel":
        if d.get("format_version") != FORMAT_VERSION:
            raise InvalidInputError(f"unsupported model format_version {d.get('format_version')!r}")
        try:
            kernel = KernelSpec.from_dict(d["kernel"])
            classes = tuple(int(c) for c in d["classes"])
            std = StandardizerParams.from_dict(d["standardizer"])
            binaries = []
            for c, b in zip(classes, d["binaries"]):
                if int(b.get("class", c)) != c:
                    raise InvalidInputError("binary models are not in class order")
                sv = np.asarray(b["support_vectors"], dtype=np.float64).reshape(-1, std.p)
                binaries.append(
                    SvmBinaryModel(
                        support_vectors=sv,
                        coefficients=np.asarray(b["coefficients"], dtype=np.float64),
                        bias=float(b["bias"]),
                        kernel=kernel,
                        positive_label=c,
                        negative_label=-1,
                        converged=bool(b["converged"]),
                    )
                )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed model document: {exc}") from None
        return cls(tuple(binaries), classes, std, float(d["c"]))

    @classmethod
    def from_json(cls, text: str) -> "MulticlassModel":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str | os.PathLike) -> "MulticlassModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def train_multiclass(
    d: Dataset,
    k: KernelSpec,
    cfg: TrainConfig,
    jobs: int = 1,
    standardizer: StandardizerParams | None = None,
) -> MulticlassModel:
    """Fit the standardizer on ``d`` and one binary SVM per class.

    Binary ``c`` is trained with ``y = +1`` on class ``c`` and ``-1`` on all
    other rows.  All binaries share a single Gram matrix.  ``jobs > 1``
    trains binaries on a thread pool (the solver releases the GIL); results
    do not depend on it.
    """
    classes = [int(c) for c in d.classes]
    if len(classes) < 2:
        raise InvalidInputError("multiclass training needs at least 2 classes")
    std = standardizer if standardizer is not None else fit_standardizer(d)
    X = standardize_array(std, d.features)
    gram = gram_matrix(k, X)

    def fit_one(c: int) -> SvmBinaryModel:
        y = np.where(d.labels == c, 1.0, -1.0)
        try:
            return smo_train(X, y, k, cfg, gram=gram, positive_label=c)
        except Exception as exc:
            raise ClassTrainingError(c, exc) from exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            binaries = list(pool.map(fit_one, classes))
    else:
        binaries = [fit_one(c) for c in classes]
    return MulticlassModel(tuple(binaries), tuple(classes), std, float(cfg.c))


def predict(m: MulticlassModel, x) -> int:
    """Class id for one raw (unstandardized) feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError(f"expected a vector, got shape {x.shape}")
    return int(m.predict_many(x[None, :])[0])
