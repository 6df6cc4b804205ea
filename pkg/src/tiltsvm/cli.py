"""Command-line interface: ``tiltsvm <subcommand> [flags]``.

Exit status is 0 on success, 1 when a flag or input fails validation and
2 when a runtime step (training, I/O) fails.  Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from tiltsvm._format import atomic_write_text
from tiltsvm.dataset import Dataset, read_csv
from tiltsvm.errors import InvalidConfigError, InvalidInputError, TiltSvmError
from tiltsvm.imu_sim import FieldConfig, GenConfig, NoiseProfile, generate_dataset
from tiltsvm.model_selection import DEFAULT_GRIDS, ParamAxis, accuracy, select_optimal, validation_curve
from tiltsvm.plot import emit_curve_svg
from tiltsvm.preprocess import SplitConfig, stratified_split
from tiltsvm.svm import KernelSpec, MulticlassModel, TrainConfig, train_multiclass

log = logging.getLogger("tiltsvm")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class RuntimeFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _add_kernel_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("kernel and solver")
    g.add_argument("--kernel", choices=("linear", "polynomial", "poly", "rbf"), default="rbf")
    g.add_argument("--c", type=float, default=1.0, help="inverse regularization C (default 1)")
    g.add_argument("--gamma", type=float, default=1.0, help="rbf / polynomial scale (default 1)")
    g.add_argument("--degree", type=int, default=3, help="polynomial degree (default 3)")
    g.add_argument("--coef0", type=float, default=1.0, help="polynomial constant (default 1)")
    g.add_argument("--tol", type=float, default=1e-3, help="KKT tolerance (default 1e-3)")
    g.add_argument("--max-passes", type=int, default=1000, help="pair updates per row (default 1000)")
    g.add_argument("--seed", type=int, default=0, help="working-set scan order seed")
    g.add_argument("--jobs", type=int, default=1, help="worker threads (default 1)")


def _add_gen_flags(p: argparse.ArgumentParser, seed_default: int | None) -> None:
    g = p.add_argument_group("synthetic data")
    g.add_argument("--samples-per-class", type=int, default=742)
    if seed_default is not None:
        g.add_argument("--seed", type=int, default=seed_default, help="noise seed")
    g.add_argument("--levels", type=_float_list, default=None, help="tilt levels in degrees")
    g.add_argument("--axes", type=_str_list, default=None, help="tilted body axes, e.g. x,y")
    g.add_argument("--accel-sigma", type=float, default=None, help="m/s^2 (default 0.02 g)")
    g.add_argument("--accel-bias", type=float, default=None, help="m/s^2 (default 0.01 g)")
    g.add_argument("--gyro-sigma", type=float, default=None, help="rad/s (default 0.5 deg/s)")
    g.add_argument("--gyro-bias", type=float, default=None, help="rad/s (default 1 deg/s)")
    g.add_argument("--mag-sigma", type=float, default=None, help="uT (default 1)")
    g.add_argument("--gravity", type=float, default=9.81, help="m/s^2 (default 9.81)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tiltsvm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a synthetic labeled sensor dataset")
    p.add_argument("--out", required=True, help="output CSV path")
    _add_gen_flags(p, seed_default=42)

    p = sub.add_parser("split", help="stratified train/test split of a dataset CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    p.add_argument("--test-fraction", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("train", help="train a one-vs-rest SVM and save it as JSON")
    p.add_argument("--data", required=True, help="training CSV")
    p.add_argument("--model", required=True, help="output model JSON")
    _add_kernel_flags(p)

    p = sub.add_parser("eval", help="print accuracy of a model on a labeled CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)

    p = sub.add_parser("predict", help="print one predicted class id per row")
    p.add_argument("--data", required=True, help="CSV of feature rows (label column optional)")
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="write predictions here instead of stdout")

    p = sub.add_parser(
        "sweep",
        help="validation curve over one hyperparameter",
        description="Without --train/--test (or --data) the default synthetic corpus is "
        "generated and split 70/30 with --data-seed.",
    )
    p.add_argument("--axis", required=True, choices=tuple(DEFAULT_GRIDS))
    p.add_argument("--grid", type=_float_list, default=None, help="comma-separated values")
    p.add_argument("--train", help="training CSV")
    p.add_argument("--test", help="validation CSV")
    p.add_argument("--data", help="single CSV to split with --test-fraction")
    p.add_argument("--test-fraction", type=float, default=0.3)
    p.add_argument("--data-seed", type=int, default=42, help="seed for generated data and split")
    p.add_argument("--samples-per-class", type=int, default=742)
    p.add_argument("--curve", required=True, help="output curve CSV")
    p.add_argument("--svg", help="output SVG chart")
    p.add_argument("--models-dir", help="save the model of every grid point here")
    _add_kernel_flags(p)
    return parser


# -- validation helpers ---------------------------------------------------------


def _need_file(path: str) -> None:
    if not Path(path).is_file():
        raise UsageError(f"input file not found: {path}")


def _need_writable(*paths: str | None) -> None:
    for path in paths:
        if path is None:
            continue
        parent = Path(path).parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            raise RuntimeFailure(f"cannot write {path}: directory missing or not writable")
        if Path(path).is_dir():
            raise RuntimeFailure(f"cannot write {path}: is a directory")


def _kernel_and_config(args) -> tuple[KernelSpec, TrainConfig]:
    if args.jobs < 1:
        raise InvalidConfigError("--jobs must be >= 1")
    k = KernelSpec(args.kernel, args.gamma, args.degree, args.coef0)
    cfg = TrainConfig(c=args.c, tol=args.tol, max_passes=args.max_passes, seed=args.seed)
    return k, cfg


def _gen_config(args, seed: int) -> GenConfig:
    defaults = NoiseProfile()
    noise = NoiseProfile(
        accel_sigma=defaults.accel_sigma if args.accel_sigma is None else args.accel_sigma,
        accel_bias_bound=defaults.accel_bias_bound if args.accel_bias is None else args.accel_bias,
        gyro_sigma=defaults.gyro_sigma if args.gyro_sigma is None else args.gyro_sigma,
        gyro_bias_bound=defaults.gyro_bias_bound if args.gyro_bias is None else args.gyro_bias,
        mag_sigma=defaults.mag_sigma if args.mag_sigma is None else args.mag_sigma,
        seed=seed,
    )
    kwargs = {"samples_per_class": args.samples_per_class, "noise": noise, "fields": FieldConfig(args.gravity)}
    if args.levels is not None:
        kwargs["angle_levels"] = tuple(args.levels)
    if args.axes is not None:
        kwargs["axes"] = tuple(args.axes)
    cfg = GenConfig(**kwargs)
    if not cfg.class_poses():
        raise InvalidConfigError("configuration yields zero classes")
    return cfg


def _load(path: str, require_label: bool = True) -> Dataset:
    _need_file(path)
    return read_csv(path, require_label=require_label)


# -- subcommands ----------------------------------------------------------------


def cmd_generate(args) -> int:
    cfg = _gen_config(args, args.seed)
    _need_writable(args.out)
    d = generate_dataset(cfg)
    d.write_csv(args.out)
    log.info("wrote %d rows, %d classes to %s", d.n, len(d.classes), args.out)
    return EXIT_OK


def cmd_split(args) -> int:
    cfg = SplitConfig(args.test_fraction, args.seed)
    d = _load(args.data)
    _need_writable(args.train_out, args.test_out)
    train, test = stratified_split(d, cfg)
    train.write_csv(args.train_out)
    test.write_csv(args.test_out)
    log.info("train %d rows -> %s, test %d rows -> %s", train.n, args.train_out, test.n, args.test_out)
    return EXIT_OK


def cmd_train(args) -> int:
    k, cfg = _kernel_and_config(args)
    d = _load(args.data)
    _need_writable(args.model)
    m = _train(d, k, cfg, args.jobs)
    m.save(args.model)
    return EXIT_OK


def _train(d: Dataset, k: KernelSpec, cfg: TrainConfig, jobs: int) -> MulticlassModel:
    try:
        m = train_multiclass(d, k, cfg, jobs=jobs)
    except InvalidInputError:
        raise
    except TiltSvmError as exc:
        raise RuntimeFailure(str(exc)) from exc
    if not m.converged:
        bad = [c for c, b in zip(m.class_ids, m.binaries) if not b.converged]
        log.warning("iteration bound reached for classes %s; saving best-effort model", bad)
    return m


def _load_model(path: str) -> MulticlassModel:
    _need_file(path)
    return MulticlassModel.load(path)


def cmd_eval(args) -> int:
    m = _load_model(args.model)
    d = _load(args.data)
    print(f"accuracy={accuracy(m, d):.6g}")
    return EXIT_OK


def cmd_predict(args) -> int:
    m = _load_model(args.model)
    d = _load(args.data, require_label=False)
    if args.out:
        _need_writable(args.out)
    if d.p != m.standardizer.p:
        raise InvalidInputError(f"data has {d.p} features, model expects {m.standardizer.p}")
    text = "".join(f"{int(c)}\n" for c in m.predict_many(d.features))
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    k, cfg = _kernel_and_config(args)
    axis = ParamAxis(args.axis, args.grid if args.grid is not None else DEFAULT_GRIDS[args.axis])
    if axis.name == "gamma" and k.family == "linear":
        raise InvalidConfigError("the linear kernel has no gamma parameter")
    if axis.name == "degree" and k.family != "polynomial":
        raise InvalidConfigError("degree applies to the polynomial kernel only")
    split_cfg = SplitConfig(args.test_fraction, args.data_seed)
    if (args.train is None) != (args.test is None):
        raise UsageError("--train and --test must be given together")
    if args.train is not None and args.data is not None:
        raise UsageError("use either --train/--test or --data, not both")
    if args.train is not None:
        train, test = _load(args.train), _load(args.test)
    else:
        if args.data is not None:
            d = _load(args.data)
        else:
            if args.samples_per_class < 1:
                raise InvalidConfigError("--samples-per-class must be >= 1")
            d = generate_dataset(
                GenConfig(samples_per_class=args.samples_per_class, noise=NoiseProfile(seed=args.data_seed))
            )
        train, test = stratified_split(d, split_cfg)
    if args.models_dir is not None and not Path(args.models_dir).is_dir():
        raise RuntimeFailure(f"--models-dir {args.models_dir} is not a directory")
    _need_writable(args.curve, args.svg)

    curve = validation_curve(train, test, k, cfg, axis, jobs=args.jobs)
    if not curve.successful():
        raise RuntimeFailure("every grid point failed")
    curve.write_csv(args.curve)
    if args.svg:
        emit_curve_svg(curve, args.svg)
    if args.models_dir is not None:
        for p in curve.successful():
            p.model.save(Path(args.models_dir) / f"{axis.name}_{p.param_value:g}.json")
    best = select_optimal(curve)
    print(f"best_{axis.name}={best.best_value:g}")
    print(f"best_validation_accuracy={best.best_validation_accuracy:.6g}")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "split": cmd_split,
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
    "sweep": cmd_sweep,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        return COMMANDS[args.command](args)
    except (UsageError, InvalidConfigError, InvalidInputError) as exc:
        print(f"tiltsvm {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (RuntimeFailure, TiltSvmError, OSError) as exc:
        print(f"tiltsvm {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - last-resort runtime failure
        print(f"tiltsvm {args.command}: unexpected error: {exc!r}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
