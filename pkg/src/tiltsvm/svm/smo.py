"""Sequential minimal optimization for the soft-margin SVM dual.

Solves

    max_a  sum(a) - 1/2 a^T Q a,   Q_ij = y_i y_j K_ij
    s.t.   0 <= a_i <= C,  sum(a_i y_i) = 0

over a precomputed Gram matrix.  Each step takes the maximal-violating index
``i`` and picks ``j`` by the second-order gain rule (Fan, Chen & Lin, JMLR
2005), then solves the two-variable subproblem in closed form.  Candidate
indices are scanned in a seeded random order, which decides ties.  The loop
stops when the KKT gap ``m(a) - M(a)`` drops below ``tol``.

With shrinking enabled, bound variables that are unlikely to move are
dropped from the active set every ``min(N, 1000)`` steps, as in LIBSVM; the
full gradient is rebuilt before optimality is declared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from tiltsvm.errors import InvalidConfigError, InvalidInputError
from tiltsvm.svm.kernels import KernelSpec, cross_kernel, gram_matrix

_TAU = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    """Solver settings.

    ``max_passes`` bounds the number of pair updates at
    ``max_passes * N`` for an ``N``-row training set.
    """

    c: float = 1.0
    tol: float = 1e-3
    max_passes: int = 1000
    seed: int = 0
    shrinking: bool = True

    def __post_init__(self) -> None:
        if not (isinstance(self.c, (int, float)) and math.isfinite(self.c) and self.c > 0):
            raise InvalidConfigError(f"C must be > 0, got {self.c!r}")
        if not (math.isfinite(self.tol) and self.tol > 0):
            raise InvalidConfigError(f"tol must be > 0, got {self.tol!r}")
        if int(self.max_passes) != self.max_passes or self.max_passes < 1:
            raise InvalidConfigError(f"max_passes must be an integer >= 1, got {self.max_passes!r}")


@numba.njit(cache=True, nogil=True)
def _select(K, diag, y, alpha, G, C, active, size):  # pragma: no cover - compiled
    # i: maximal violator in I_up; j: best second-order gain in I_low
    gmax = -np.inf
    i = -1
    for s in range(size):
        t = active[s]
        if y[t] > 0:
            if alpha[t] < C and -G[t] > gmax:
                gmax = -G[t]
                i = t
        elif alpha[t] > 0 and G[t] > gmax:
            gmax = G[t]
            i = t
    gmax2 = -np.inf
    j = -1
    if i < 0:
        return i, j, -np.inf
    best = np.inf
    kii = diag[i]
    ki = K[i]
    for s in range(size):
        t = active[s]
        if y[t] > 0:
            if alpha[t] <= 0:
                continue
            if G[t] > gmax2:
                gmax2 = G[t]
            diff = gmax + G[t]
        else:
            if alpha[t] >= C:
                continue
            if -G[t] > gmax2:
                gmax2 = -G[t]
            diff = gmax - G[t]
        if diff > 0:
            quad = kii + diag[t] - 2.0 * ki[t]
            if quad <= 0:
                quad = _TAU
            gain = -(diff * diff) / quad
            if gain < best:
                best = gain
                j = t
    return i, j, gmax + gmax2


@numba.njit(cache=True, nogil=True)
def _reconstruct(K, y, alpha, G, G_bar, C, active, size):  # pragma: no cover - compiled
    n = y.shape[0]
    for s in range(size, n):
        t = active[s]
        G[t] = G_bar[t] - 1.0
    for s in range(size):
        f = active[s]
        if 0 < alpha[f] < C:
            coef = y[f] * alpha[f]
            kf = K[f]
            for r in range(size, n):
                t = active[r]
                G[t] += y[t] * coef * kf[t]


@numba.njit(cache=True, nogil=True)
def _shrink(y, alpha, G, C, active, size):  # pragma: no cover - compiled
    g1 = -np.inf
    g2 = -np.inf
    for s in range(size):
        t = active[s]
        if y[t] > 0:
            if alpha[t] < C and -G[t] > g1:
                g1 = -G[t]
            if alpha[t] > 0 and G[t] > g2:
                g2 = G[t]
        else:
            if alpha[t] < C and -G[t] > g2:
                g2 = -G[t]
            if alpha[t] > 0 and G[t] > g1:
                g1 = G[t]
    return g1, g2


@numba.njit(cache=True, nogil=True)
def _compact(y, alpha, G, C, active, size, g1, g2):  # pragma: no cover - compiled
    # stable partition: kept indices first, shrunk ones behind them
    keep = np.empty(size, dtype=active.dtype)
    drop = np.empty(size, dtype=active.dtype)
    nk = 0
    nd = 0
    for s in range(size):
        t = active[s]
        out = False
        if alpha[t] >= C:
            out = (-G[t] > g1) if y[t] > 0 else (-G[t] > g2)
        elif alpha[t] <= 0:
            out = (G[t] > g2) if y[t] > 0 else (G[t] > g1)
        if out:
            drop[nd] = t
            nd += 1
        else:
            keep[nk] = t
            nk += 1
    for s in range(nk):
        active[s] = keep[s]
    for s in range(nd):
        active[nk + s] = drop[s]
    return nk


@numba.njit(cache=True, nogil=True)
def _solve(K, y, C, eps, max_iter, order, shrinking):  # pragma: no cover - compiled
    n = y.shape[0]
    diag = np.empty(n)
    for t in range(n):
        diag[t] = K[t, t]
    alpha = np.zeros(n)
    G = -np.ones(n)
    # G_bar[t] = C * sum over upper-bounded j of Q[t, j]
    G_bar = np.zeros(n)
    active = order.copy()
    size = n
    unshrunk = False
    counter = min(n, 1000) + 1
    it = 0
    converged = False
    while it < max_iter:
        if shrinking:
            counter -= 1
            if counter == 0:
                counter = min(n, 1000)
                g1, g2 = _shrink(y, alpha, G, C, active, size)
                if not unshrunk and g1 + g2 <= eps * 10:
                    unshrunk = True
                    _reconstruct(K, y, alpha, G, G_bar, C, active, size)
                    size = n
                size = _compact(y, alpha, G, C, active, size, g1, g2)
        i, j, gap = _select(K, diag, y, alpha, G, C, active, size)
        if i < 0 or j < 0 or gap < eps:
            if size == n:
                converged = True
                break
            _reconstruct(K, y, alpha, G, G_bar, C, active, size)
            size = n
            i, j, gap = _select(K, diag, y, alpha, G, C, active, size)
            if i < 0 or j < 0 or gap < eps:
                converged = True
                break
            counter = 1

        ai = alpha[i]
        aj = alpha[j]
        quad = diag[i] + diag[j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = _TAU
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0:
                    ai = 0.0
                    aj = -diff
            if diff > 0:
                if ai > C:
                    ai = C
                    aj = C - diff
            else:
                if aj > C:
                    aj = C
                    ai = C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai = C
                    aj = total - C
                if aj > C:
                    aj = C
                    ai = total - C
            else:
                if aj < 0:
                    aj = 0.0
                    ai = total
                if ai < 0:
                    ai = 0.0
                    aj = total
        old_ui = alpha[i] >= C
        old_uj = alpha[j] >= C
        dai = ai - alpha[i]
        daj = aj - alpha[j]
        alpha[i] = ai
        alpha[j] = aj
        yi = y[i] * dai
        yj = y[j] * daj
        ki = K[i]
        kj = K[j]
        for s in range(size):
            t = active[s]
            G[t] += y[t] * (yi * ki[t] + yj * kj[t])
        if shrinking:
            if old_ui != (ai >= C):
                w = C * y[i] if ai >= C else -C * y[i]
                for t in range(n):
                    G_bar[t] += w * y[t] * ki[t]
            if old_uj != (aj >= C):
                w = C * y[j] if aj >= C else -C * y[j]
                for t in range(n):
                    G_bar[t] += w * y[t] * kj[t]
        it += 1
    if size < n:
        _reconstruct(K, y, alpha, G, G_bar, C, active, size)
    return alpha, G, it, converged


@numba.njit(cache=True, nogil=True)
def _rho(alpha, G, y, C):  # pragma: no cover - compiled
    ub = np.inf
    lb = -np.inf
    total = 0.0
    nfree = 0
    for t in range(y.shape[0]):
        yg = y[t] * G[t]
        if alpha[t] >= C:
            if y[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif alpha[t] <= 0:
            if y[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            nfree += 1
            total += yg
    if nfree > 0:
        return total / nfree, nfree
    return 0.5 * (ub + lb), 0


@dataclass(frozen=True, eq=False)
class SvmBinaryModel:
    """Kernel expansion ``f(x) = bias + sum_i coef_i K(sv_i, x)``.

    ``coefficients`` hold the signed products ``alpha_i * y_i``.
    """

    support_vectors: np.ndarray
    coefficients: np.ndarray
    bias: float
    kernel: KernelSpec
    positive_label: int = 1
    negative_label: int = -1
    converged: bool = True
    n_iter: int = 0
    dual_objective: float = float("nan")

    def __post_init__(self) -> None:
        sv = np.array(self.support_vectors, dtype=np.float64, copy=True)
        coef = np.array(self.coefficients, dtype=np.float64, copy=True).reshape(-1)
        if sv.ndim == 1 and sv.size == 0:
            sv = sv.reshape(0, 0)
        if sv.ndim != 2 or sv.shape[0] != coef.shape[0]:
            raise InvalidInputError(
                f"{coef.shape[0]} coefficients for support-vector array of shape {sv.shape}"
            )
        sv.setflags(write=False)
        coef.setflags(write=False)
        object.__setattr__(self, "support_vectors", sv)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "bias", float(self.bias))

    def decision_values(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise InvalidInputError(f"expected a 2-D matrix, got shape {X.shape}")
        if self.coefficients.shape[0] == 0:
            return np.full(X.shape[0], self.bias)
        if X.shape[1] != self.support_vectors.shape[1]:
            raise InvalidInputError(
                f"expected {self.support_vectors.shape[1]} features, got {X.shape[1]}"
            )
        return cross_kernel(self.kernel, X, self.support_vectors) @ self.coefficients + self.bias

    def to_dict(self) -> dict:
        return {
            "support_vectors": [[float(v) for v in row] for row in self.support_vectors],
            "coefficients": [float(v) for v in self.coefficients],
            "bias": self.bias,
            "converged": bool(self.converged),
        }


def decision_value(m: SvmBinaryModel, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError(f"expected a vector, got shape {x.shape}")
    return float(m.decision_values(x[None, :])[0])


def dual_objective(alpha: np.ndarray, y: np.ndarray, gram: np.ndarray) -> float:
    """``sum(a) - 1/2 (a*y)^T K (a*y)``."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ gram @ ay)


@dataclass(frozen=True, eq=False)
class DualSolution:
    alpha: np.ndarray
    gradient: np.ndarray
    rho: float
    n_free: int
    n_iter: int
    converged: bool


def solve_dual(gram: np.ndarray, y: np.ndarray, cfg: TrainConfig) -> DualSolution:
    """Run SMO on a precomputed Gram matrix; ``y`` holds +1/-1 labels."""
    gram = np.ascontiguousarray(gram, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = y.shape[0]
    if gram.shape != (n, n):
        raise InvalidInputError(f"Gram matrix shape {gram.shape} does not match {n} labels")
    order = np.random.Generator(np.random.Philox(key=int(cfg.seed) & ((1 << 64) - 1))).permutation(n)
    alpha, grad, n_iter, converged = _solve(
        gram, y, float(cfg.c), float(cfg.tol), int(cfg.max_passes) * n, order.astype(np.int64),
        bool(cfg.shrinking),
    )
    rho, n_free = _rho(alpha, grad, y, float(cfg.c))
    return DualSolution(alpha, grad, float(rho), int(n_free), int(n_iter), bool(converged))


def _check_binary_labels(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if not np.all((y == 1.0) | (y == -1.0)):
        raise InvalidInputError("binary labels must be +1 or -1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise InvalidInputError("both classes (+1 and -1) must be present")
    return y


def smo_train(
    X,
    y,
    k: KernelSpec,
    cfg: TrainConfig,
    gram: np.ndarray | None = None,
    positive_label: int = 1,
    negative_label: int = -1,
) -> SvmBinaryModel:
    """Train a binary soft-margin SVM.

    Parameters
    ----------
    X : array of shape (N, p)
        Training rows (already scaled as desired).
    y : array of shape (N,)
        Labels in {+1, -1}; both must occur.
    k, cfg : KernelSpec, TrainConfig
    gram : array of shape (N, N), optional
        Precomputed ``gram_matrix(k, X)``, reused across one-vs-rest runs.

    Returns
    -------
    SvmBinaryModel
        Support set ``{i : alpha_i > 0}``.  ``converged`` is False when the
        iteration bound ran out first; the coefficients are then the last
        iterate.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidInputError(f"expected a 2-D matrix, got shape {X.shape}")
    y = _check_binary_labels(y)
    if X.shape[0] != y.shape[0]:
        raise InvalidInputError(f"{X.shape[0]} rows but {y.shape[0]} labels")
    if gram is None:
        gram = gram_matrix(k, X)
    sol = solve_dual(gram, y, cfg)
    sv = np.flatnonzero(sol.alpha > 0)
    ay = sol.alpha * y
    return SvmBinaryModel(
        support_vectors=X[sv],
        coefficients=ay[sv],
        bias=-sol.rho,
        kernel=k,
        positive_label=positive_label,
        negative_label=negative_label,
        converged=sol.converged,
        n_iter=sol.n_iter,
        dual_objective=0.5 * float(sol.alpha.sum()) - 0.5 * float(sol.alpha @ sol.gradient),
    )
