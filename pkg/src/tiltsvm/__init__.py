"""Synthetic MEMS tilt data and kernel-SVM tilt-class prediction."""

from tiltsvm.dataset import Dataset, read_csv
from tiltsvm.errors import InvalidConfigError, InvalidInputError, NoResultError, TiltSvmError

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "InvalidConfigError",
    "InvalidInputError",
    "NoResultError",
    "TiltSvmError",
    "read_csv",
]
