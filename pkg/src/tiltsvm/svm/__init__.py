"""Kernel SVM: kernels, SMO dual solver, one-vs-rest multiclass models."""

from tiltsvm.svm.kernels import KernelSpec, cross_kernel, gram_matrix, kernel_eval
from tiltsvm.svm.multiclass import ClassTrainingError, MulticlassModel, predict, train_multiclass
from tiltsvm.svm.smo import (
    SvmBinaryModel,
    TrainConfig,
    decision_value,
    dual_objective,
    smo_train,
    solve_dual,
)

__all__ = [
    "ClassTrainingError",
    "KernelSpec",
    "MulticlassModel",
    "SvmBinaryModel",
    "TrainConfig",
    "cross_kernel",
    "decision_value",
    "dual_objective",
    "gram_matrix",
    "kernel_eval",
    "predict",
    "smo_train",
    "solve_dual",
    "train_multiclass",
]
