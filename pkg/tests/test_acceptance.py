"""Acceptance gate.

Each test checks one acceptance criterion at its stated tolerance and prints
a single ``[PASS]`` / ``[FAIL]`` line.  Run with ``pytest tests/test_acceptance.py -s``
to see the lines.  The default-corpus experiments share one dataset and split
through module-scoped fixtures.
"""

import time

import numpy as np
import pytest

from oracles import bias_from_alpha, dual_value, solve_dual_oracle
from tiltsvm.cli import run
from tiltsvm.dataset import Dataset
from tiltsvm.imu_sim import EulerAngles, GenConfig, NoiseProfile, generate_dataset, ideal_reading, rotation_matrix
from tiltsvm.model_selection import ParamAxis, accuracy, validation_curve
from tiltsvm.preprocess import SplitConfig, fit_standardizer, stratified_split, transform
from tiltsvm.svm import KernelSpec, TrainConfig, decision_value, gram_matrix, kernel_eval, smo_train, solve_dual
from tiltsvm.svm import train_multiclass

SEED = 42
LINEAR = KernelSpec("linear")
RBF = KernelSpec("rbf", gamma=0.01)
POLY = KernelSpec("polynomial", gamma=0.1, degree=3, coef0=1.0)


def report(number: int, title: str, ok: bool, detail: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail}")
    assert ok, f"criterion {number} ({title}) failed: {detail}"


@pytest.fixture(scope="module")
def default_split():
    d = generate_dataset(GenConfig(samples_per_class=742, noise=NoiseProfile(seed=SEED)))
    return stratified_split(d, SplitConfig(0.3, SEED))


@pytest.fixture(scope="module")
def rbf_gamma_curve(default_split):
    train, test = default_split
    return validation_curve(train, test, RBF, TrainConfig(c=100.0, seed=SEED), ParamAxis.default("gamma"), jobs=2)


@pytest.fixture(scope="module")
def linear_c_curve(default_split):
    # the largest default C values are left out: the linear solver needs minutes there
    # and the criterion only compares C = 0.001 against C = 10
    train, test = default_split
    axis = ParamAxis("c", (1e-3, 1e-2, 1e-1, 1.0, 10.0))
    return validation_curve(train, test, LINEAR, TrainConfig(seed=SEED), axis, jobs=2)


def test_criterion_1_analytic_two_point():
    X = np.array([[-1.0], [1.0]])
    y = np.array([-1.0, 1.0])
    smo_train(np.array([[0.0], [2.0]]), y, LINEAR, TrainConfig())  # compile outside the timed region
    t0 = time.perf_counter()
    sol = solve_dual(gram_matrix(LINEAR, X), y, TrainConfig(c=10.0))
    m = smo_train(X, y, LINEAR, TrainConfig(c=10.0))
    f = decision_value(m, [0.25])
    elapsed = time.perf_counter() - t0
    ok = (
        np.allclose(sol.alpha, [0.5, 0.5], rtol=0, atol=1e-6)
        and abs(m.bias) <= 1e-6
        and abs(f - 0.25) <= 1e-6
        and elapsed < 1.0
    )
    report(1, "analytic two-point SVM", ok, f"alpha={sol.alpha.tolist()} b={m.bias:.3g} f(0.25)={f:.9f} t={elapsed:.3f}s")


def test_criterion_2_dual_oracle_equivalence():
    rng = np.random.default_rng(2024)
    kernels = (LINEAR, KernelSpec("polynomial", gamma=0.5, degree=3, coef0=1.0), KernelSpec("rbf", gamma=0.5))
    worst_gap, sign_mismatch, cases = np.inf, 0, 0
    t0 = time.perf_counter()
    for _ in range(50):
        n = int(rng.integers(2, 13))
        X = rng.normal(size=(n, int(rng.integers(1, 4))))
        y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        y[:2] = (1.0, -1.0)
        for k in kernels:
            K = gram_matrix(k, X)
            for c in (1.0, 100.0):
                m = smo_train(X, y, k, TrainConfig(c=c))
                a = solve_dual_oracle(K, y, c, iters=50_000)
                worst_gap = min(worst_gap, m.dual_objective - dual_value(a, y, K))
                f_oracle = K @ (a * y) + bias_from_alpha(a, y, K, c)
                sign_mismatch += int(np.sum(np.sign(m.decision_values(X)) != np.sign(f_oracle)))
                cases += 1
    elapsed = time.perf_counter() - t0
    ok = worst_gap >= -1e-4 and sign_mismatch == 0 and elapsed < 60.0
    report(
        2, "SMO vs projected-gradient oracle", ok,
        f"{cases} solves; min(smo - oracle)={worst_gap:.3g}; sign mismatches={sign_mismatch}; t={elapsed:.1f}s",
    )


def test_criterion_3_gram_psd_and_identities():
    rng = np.random.default_rng(3)
    families = (LINEAR, KernelSpec("polynomial", gamma=0.3, degree=3, coef0=1.0), KernelSpec("rbf", gamma=0.7))
    min_eig = np.inf
    for i in range(100):
        X = rng.normal(size=(int(rng.integers(2, 40)), int(rng.integers(1, 6))))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(gram_matrix(families[i % 3], X)).min()))
    poly1 = KernelSpec("polynomial", gamma=1.0, degree=1, coef0=0.0)
    Z = rng.normal(size=(200, 2, 5)) * 4
    poly_err = max(abs(kernel_eval(poly1, x, z) - kernel_eval(LINEAR, x, z)) for x, z in Z)
    rbf_self = all(kernel_eval(KernelSpec("rbf", g), x, x) == 1.0 for g in (1e-3, 1.0, 50.0) for x, _ in Z)
    rbf_diag = bool(np.all(np.diag(gram_matrix(KernelSpec("rbf", 2.0), Z[:, 0])) == 1.0))
    ok = min_eig >= -1e-8 and poly_err <= 1e-12 and rbf_self and rbf_diag
    report(3, "Gram PSD and kernel identities", ok,
           f"min eigenvalue={min_eig:.3g}; |poly1 - linear|={poly_err:.3g}; rbf(x,x)==1: {rbf_self and rbf_diag}")


def test_criterion_4_standardization(default_split):
    train, _ = default_split
    s = fit_standardizer(train)
    z = transform(s, train).features
    mean_err = float(np.abs(z.mean(axis=0)).max())
    std_err = float(np.abs(z.std(axis=0) - 1.0).max())
    const = Dataset(np.column_stack([train.features[:, 0], np.full(train.n, 3.5)]), train.labels, ("a", "b"))
    zc = transform(fit_standardizer(const), const).features
    ok = mean_err <= 1e-9 and std_err <= 1e-9 and np.all(zc[:, 1] == 0.0)
    report(4, "standardization moments", ok,
           f"max|mean|={mean_err:.3g}; max|std-1|={std_err:.3g}; constant column -> 0: {bool(np.all(zc[:, 1] == 0))}")


def test_criterion_5_split_fidelity():
    d = generate_dataset(GenConfig(samples_per_class=742, noise=NoiseProfile(seed=SEED)))
    keep = np.ones(d.n, dtype=bool)
    keep[np.flatnonzero(d.labels == 12)[:4]] = False
    d = d.subset(np.flatnonzero(keep))
    train, test = stratified_split(d, SplitConfig(0.3, SEED))
    dev = max(abs(np.sum(test.labels == c) - np.sum(d.labels == c) * 0.3) for c in range(13))
    ok = d.n == 9642 and (test.n, train.n) == (2893, 6749) and dev <= 1.0 and len(np.unique(test.labels)) == 13
    report(5, "split fidelity", ok, f"N={d.n} test={test.n} train={train.n}; max per-class deviation={dev:.2f}")


@pytest.mark.slow
def test_criterion_6_accuracy_ordering(default_split):
    train, test = default_split
    t0 = time.perf_counter()
    acc = {}
    for name, k, c in (("linear", LINEAR, 10.0), ("rbf", RBF, 100.0), ("poly", POLY, 1000.0)):
        acc[name] = accuracy(train_multiclass(train, k, TrainConfig(c=c, seed=SEED), jobs=2), test)
    elapsed = time.perf_counter() - t0
    checks = {
        "linear>=0.85": acc["linear"] >= 0.85,
        "rbf>=0.85": acc["rbf"] >= 0.85,
        "poly<best(linear,rbf)": acc["poly"] < max(acc["linear"], acc["rbf"]),
        "t<600s": elapsed < 600.0,
    }
    report(6, "accuracy ordering on the default corpus", all(checks.values()),
           f"linear={acc['linear']:.4f} rbf={acc['rbf']:.4f} poly={acc['poly']:.4f} t={elapsed:.0f}s; "
           + " ".join(f"{k}:{'ok' if v else 'NO'}" for k, v in checks.items()))


@pytest.mark.slow
def test_criterion_7_curve_shape(linear_c_curve, rbf_gamma_curve):
    lin = linear_c_curve
    gap = lin.point(10.0).validation_accuracy - lin.point(1e-3).validation_accuracy
    g = rbf_gamma_curve
    best = max(p.validation_accuracy for p in g.successful())
    hi, lo = g.point(10.0), g.point(1e-4)
    checks = {
        "linear val(C=10)-val(C=0.001)>=0.05": gap >= 0.05,
        "rbf train(10)>=train(1e-4)": hi.train_accuracy >= lo.train_accuracy,
        "rbf val(10)<=best-0.02": hi.validation_accuracy <= best - 0.02,
    }
    lin_str = " ".join(f"{p.param_value:g}:{p.validation_accuracy:.3f}" for p in lin.points)
    rbf_str = " ".join(f"{p.param_value:g}:{p.train_accuracy:.3f}/{p.validation_accuracy:.3f}" for p in g.points)
    report(7, "validation-curve shape", all(checks.values()),
           f"linear val by C [{lin_str}]; rbf train/val by gamma [{rbf_str}]; "
           + " ".join(f"{k}:{'ok' if v else 'NO'}" for k, v in checks.items()))


def _pipeline(root) -> dict[str, bytes]:
    root.mkdir()
    f = {n: str(root / n) for n in ("data.csv", "train.csv", "test.csv", "model.json", "curve.csv", "curve.svg")}
    steps = [
        ["generate", "--out", f["data.csv"], "--samples-per-class", "742", "--seed", str(SEED)],
        ["split", "--data", f["data.csv"], "--train-out", f["train.csv"], "--test-out", f["test.csv"],
         "--seed", str(SEED)],
        ["train", "--data", f["train.csv"], "--kernel", "rbf", "--c", "100", "--gamma", "0.01",
         "--seed", str(SEED), "--model", f["model.json"]],
        ["sweep", "--axis", "gamma", "--grid", "0.001,0.01,0.1", "--kernel", "rbf", "--c", "100",
         "--train", f["train.csv"], "--test", f["test.csv"], "--seed", str(SEED), "--jobs", "3",
         "--curve", f["curve.csv"], "--svg", f["curve.svg"]],
    ]
    for argv in steps:
        assert run(argv) == 0, argv
    return {n: (root / n).read_bytes() for n in f}


@pytest.mark.slow
def test_criterion_8_determinism(tmp_path):
    a, b = _pipeline(tmp_path / "run1"), _pipeline(tmp_path / "run2")
    same = {n: a[n] == b[n] for n in a}
    report(8, "byte-identical pipeline outputs", all(same.values()),
           " ".join(f"{n}:{'same' if s else 'DIFFERENT'}" for n, s in same.items()))


def test_criterion_9_physics_invariants():
    rng = np.random.default_rng(9)
    angles = np.column_stack([
        rng.uniform(-np.pi, np.pi, 1000), rng.uniform(-np.pi / 2, np.pi / 2, 1000), rng.uniform(-np.pi, np.pi, 1000)
    ])
    norm_err = orth_err = 0.0
    for r, p, y in angles:
        e = EulerAngles(r, p, y)
        R = rotation_matrix(e)
        orth_err = max(orth_err, float(np.abs(R.T @ R - np.eye(3)).max()), abs(float(np.linalg.det(R)) - 1.0))
        norm_err = max(norm_err, abs(float(np.linalg.norm(ideal_reading(e).accel)) - 9.81))
    ok = norm_err <= 1e-12 and orth_err <= 1e-12
    report(9, "physics invariants", ok, f"max| |a| - 9.81 |={norm_err:.3g}; max orthonormality error={orth_err:.3g}")
