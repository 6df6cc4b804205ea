"""Kernel functions and Gram matrices.

* linear:      ``K(x, z) = x . z``
* polynomial:  ``K(x, z) = (coef0 + gamma * x . z) ** degree``
* rbf:         ``K(x, z) = exp(-gamma * ||x - z||^2)``

The polynomial kernel carries a ``gamma`` scale so that the polynomial
validation curves can sweep it; with ``gamma = 1`` it is the plain
``(coef0 + x . z) ** degree`` form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from tiltsvm.errors import InvalidConfigError, InvalidInputError

FAMILIES = ("linear", "polynomial", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    family: str = "rbf"
    gamma: float = 1.0
    degree: int = 3
    coef0: float = 1.0

    def __post_init__(self) -> None:
        family = str(self.family).lower()
        if family == "poly":
            family = "polynomial"
        if family not in FAMILIES:
            raise InvalidConfigError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "family", family)
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise InvalidConfigError(f"gamma must be > 0, got {self.gamma!r}")
        if int(self.degree) != self.degree or self.degree < 1:
            raise InvalidConfigError(f"degree must be an integer >= 1, got {self.degree!r}")
        object.__setattr__(self, "degree", int(self.degree))
        if not math.isfinite(self.coef0):
            raise InvalidConfigError("coef0 must be finite")

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "gamma": float(self.gamma),
            "degree": int(self.degree),
            "coef0": float(self.coef0),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(d["family"], float(d["gamma"]), int(d["degree"]), float(d["coef0"]))


def _as_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError(f"expected a vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("vector contains NaN or Inf")
    return x


def _as_matrix(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidInputError(f"expected a 2-D matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("matrix contains NaN or Inf")
    return x


def kernel_eval(k: KernelSpec, x, z) -> float:
    x, z = _as_vector(x), _as_vector(z)
    if x.shape != z.shape:
        raise InvalidInputError(f"dimension mismatch: {x.shape[0]} vs {z.shape[0]}")
    if k.family == "rbf":
        d = x - z
        return math.exp(-k.gamma * float(np.dot(d, d)))
    dot = float(np.dot(x, z))
    if k.family == "linear":
        return dot
    return (k.coef0 + k.gamma * dot) ** k.degree


def _symmetrize(g: np.ndarray) -> np.ndarray:
    # copy upper triangle into lower, row by row, to avoid an N^2 temporary
    for i in range(1, g.shape[0]):
        g[i, :i] = g[:i, i]
    return g


def gram_matrix(k: KernelSpec, X) -> np.ndarray:
    """Exactly symmetric ``N x N`` matrix ``G[i, j] = K(x_i, x_j)``."""
    X = _as_matrix(X)
    if k.family == "rbf":
        g = squareform(pdist(X, "sqeuclidean"))
        g *= -k.gamma
        np.exp(g, out=g)
        return g
    g = _symmetrize(np.ascontiguousarray(X @ X.T))
    if k.family == "polynomial":
        g *= k.gamma
        g += k.coef0
        g **= k.degree
    return g


def cross_kernel(k: KernelSpec, A, B) -> np.ndarray:
    """``len(A) x len(B)`` matrix of kernel values between two row sets."""
    A, B = _as_matrix(A), _as_matrix(B)
    if A.shape[1] != B.shape[1]:
        raise InvalidInputError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if k.family == "rbf":
        g = cdist(A, B, "sqeuclidean")
        g *= -k.gamma
        np.exp(g, out=g)
        return g
    g = A @ B.T
    if k.family == "polynomial":
        g *= k.gamma
        g += k.coef0
        g **= k.degree
    return g
