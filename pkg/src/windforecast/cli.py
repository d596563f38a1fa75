"""Command-line interface.

Commands: gen, correlate, fit, sweep, plot-data, gradcheck.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields as dataclass_fields
from pathlib import Path

import numpy as np

from . import ann, harness, regression, stats
from .dataset import (
    Dataset,
    FeatureSet,
    SplitSpec,
    SyntheticConfig,
    generate_synthetic,
    parse_csv,
    select_features,
    split,
    write_csv,
)
from .errors import DataError, InvalidConfig, NumericError
from .metrics import EvalReport

GRADCHECK_TOLERANCE = 1e-4


class _UsageError(Exception):
    """Command-line misuse that argparse cannot express declaratively."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the CLI contract reserves 2
    # for data errors, so remap to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_dataset(args) -> Dataset:
    path = Path(args.data)
    if not path.exists():
        raise DataError(f"data file not found: {path}")
    rated = getattr(args, "rated_power", None)
    return parse_csv(path.read_bytes(), rated_power=rated)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _floats(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _ints(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _feature_sets(text: str) -> list[FeatureSet]:
    return [FeatureSet.parse(part) for part in text.split(",") if part.strip()]


def _read_config_file(path: Path) -> dict:
    """Flat key=value synthetic config; '#' starts a comment."""
    if not path.exists():
        raise DataError(f"config file not found: {path}")
    valid = {f.name for f in dataclass_fields(SyntheticConfig)}
    values = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise InvalidConfig(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, raw = body.partition("=")
        key = key.strip()
        if key not in valid:
            raise InvalidConfig(f"{path}:{lineno}: unknown key {key!r}")
        raw = raw.strip()
        values[key] = int(raw) if key in ("n_samples", "seed") else float(raw)
    return values


def _cmd_gen(args) -> int:
    values = _read_config_file(Path(args.config)) if args.config else {}
    for name in (
        "n_samples",
        "cut_in_speed",
        "rated_speed",
        "cut_out_speed",
        "rated_power",
        "air_density",
        "rotor_area",
        "power_coefficient",
        "noise_sd",
        "seed",
    ):
        flag_value = getattr(args, name)
        if flag_value is not None:
            values[name] = flag_value
    config = SyntheticConfig(**values)
    dataset = generate_synthetic(config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(write_csv(dataset))
    print(f"wrote {len(dataset)} rows to {out}")
    return 0


def _cmd_correlate(args) -> int:
    dataset = _load_dataset(args)
    cm = stats.correlation_matrix(dataset)
    width = max(len(label) for label in cm.labels)
    print(" " * (width + 1) + "  ".join(f"{label:>14s}" for label in cm.labels))
    for i, label in enumerate(cm.labels):
        cells = "  ".join(f"{cm.values[i, j]:14.6f}" for j in range(len(cm.labels)))
        print(f"{label:>{width}s} {cells}")
    out = _out_dir(args)
    heatmap_path = out / "correlation_heatmap.csv"
    heatmap_path.write_text(stats.heatmap_csv(cm))
    print(f"wrote {heatmap_path}")
    return 0


def _split_matrices(dataset, args):
    fs = FeatureSet.parse(args.features)
    train_ds, test_ds = split(dataset, SplitSpec(train_fraction=args.train_fraction, seed=args.seed))
    return select_features(train_ds, fs), select_features(test_ds, fs)


def _require_degree(command: str, args):
    if args.model == "polynomial" and args.degree is None:
        raise _UsageError(f"{command}: --degree is required when --model polynomial")


def _fit_single(dataset, args):
    """Fit one configured model; returns (model_or_None, report, extras)."""
    if args.model == "persistence":
        actual, predicted = harness.persistence_forecast(dataset, args.horizon)
        return None, EvalReport.from_predictions(actual, predicted), {}
    train_m, test_m = _split_matrices(dataset, args)
    if args.model == "linear":
        model = regression.fit_ols(train_m)
    elif args.model == "polynomial":
        model = regression.fit_polynomial(train_m, args.degree)
    else:
        cfg = ann.TrainConfig(epochs=args.epochs, seed=args.seed)
        net = ann.init_network(train_m.k, seed=args.seed)
        model, history = ann.train(net, train_m, cfg, target_scale=dataset.rated_power)
        predicted = ann.predict(model, test_m)
        return model, EvalReport.from_predictions(test_m.target, predicted), {"history": history}
    predicted = harness.predict_with(model, test_m)
    return model, EvalReport.from_predictions(test_m.target, predicted), {}


def _cmd_fit(args) -> int:
    _require_degree("fit", args)
    dataset = _load_dataset(args)
    model, report, extras = _fit_single(dataset, args)
    print(f"model={args.model} features={args.features} train_fraction={args.train_fraction}")
    print(f"mae={report.mae:.5f} kW")
    print(f"rmse={report.rmse:.5f} kW")
    print(f"r_squared={report.r_squared:.5f}")
    print(f"n_test={report.n_samples}")
    if args.out_dir is not None and model is not None:
        out = _out_dir(args)
        model_path = out / f"{args.model}_model.json"
        if isinstance(model, ann.MlpModel):
            model_path.write_text(ann.to_json(model))
            (out / "ann_loss_history.csv").write_text(ann.history_to_csv(extras["history"]))
        else:
            model_path.write_text(regression.to_json(model))
        print(f"wrote {model_path}")
    return 0


def _cmd_sweep(args) -> int:
    dataset = _load_dataset(args)
    cfg = harness.SweepConfig(
        train_fractions=tuple(_floats(args.train_fraction)),
        feature_sets=tuple(_feature_sets(args.features)),
        degrees=tuple(_ints(args.degree)),
        models=tuple(m.strip() for m in args.model.split(",") if m.strip()),
        seed=args.seed,
        ann_train=ann.TrainConfig(epochs=args.epochs, seed=args.seed),
        persistence_horizons=tuple(_ints(args.horizons)),
    )
    rows = harness.run_sweep(dataset, cfg)
    out = _out_dir(args)
    csv_path = out / "sweep.csv"
    json_path = out / "sweep.json"
    csv_path.write_text(harness.sweep_csv(rows))
    json_path.write_text(harness.sweep_json(rows, cfg))
    failed = sum(1 for r in rows if r.error is not None)
    print(f"{len(rows)} configurations ({failed} failed)")
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    return 0


def _cmd_plot_data(args) -> int:
    _require_degree("plot-data", args)
    dataset = _load_dataset(args)
    train_m, test_m = _split_matrices(dataset, args)
    if args.model == "linear":
        model = regression.fit_ols(train_m)
    elif args.model == "polynomial":
        model = regression.fit_polynomial(train_m, args.degree)
    else:
        cfg = ann.TrainConfig(epochs=args.epochs, seed=args.seed)
        net = ann.init_network(train_m.k, seed=args.seed)
        model, _ = ann.train(net, train_m, cfg, target_scale=dataset.rated_power)
    out = _out_dir(args)
    curve_path = out / f"{args.model}_power_curve.csv"
    scatter_path = out / f"{args.model}_pred_vs_actual.csv"
    curve_path.write_text(harness.emit_power_curve_points(model, test_m))
    scatter_path.write_text(harness.emit_pred_vs_actual(model, test_m))
    print(f"wrote {curve_path}")
    print(f"wrote {scatter_path}")
    return 0


def _cmd_gradcheck(args) -> int:
    sample_sets = {
        1: FeatureSet.SPEED_ONLY,
        2: FeatureSet.SPEED_DIRECTION,
        3: FeatureSet.SPEED_DIRECTION_TEMPERATURE,
    }
    dataset = generate_synthetic(SyntheticConfig(n_samples=256, seed=args.seed))
    worst = 0.0
    for dim, fs in sample_sets.items():
        full = select_features(dataset, fs)
        sample = select_features(
            Dataset(dataset.records[:32], dataset.rated_power), fs
        )
        net = ann.init_network(dim, seed=args.seed)
        err_init = ann.gradient_check(net, sample)
        trained, _ = ann.train(
            net,
            full,
            ann.TrainConfig(epochs=5, batch_size=16, seed=args.seed),
            target_scale=dataset.rated_power,
        )
        err_trained = ann.gradient_check(trained, sample)
        worst = max(worst, err_init, err_trained)
        print(
            f"input_dim={dim}: max relative error {err_init:.3e} at init, "
            f"{err_trained:.3e} after 5 epochs"
        )
    if worst >= GRADCHECK_TOLERANCE:
        print(f"FAIL: worst error {worst:.3e} >= {GRADCHECK_TOLERANCE:.0e}", file=sys.stderr)
        return 3
    print(f"OK: worst error {worst:.3e} < {GRADCHECK_TOLERANCE:.0e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="windforecast", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.add_argument("--config", help="flat key=value config file")
    gen.add_argument("--n-samples", dest="n_samples", type=int, default=None)
    gen.add_argument("--cut-in-speed", dest="cut_in_speed", type=float, default=None)
    gen.add_argument("--rated-speed", dest="rated_speed", type=float, default=None)
    gen.add_argument("--cut-out-speed", dest="cut_out_speed", type=float, default=None)
    gen.add_argument("--rated-power", dest="rated_power", type=float, default=None)
    gen.add_argument("--air-density", dest="air_density", type=float, default=None)
    gen.add_argument("--rotor-area", dest="rotor_area", type=float, default=None)
    gen.add_argument("--power-coefficient", dest="power_coefficient", type=float, default=None)
    gen.add_argument("--noise-sd", dest="noise_sd", type=float, default=None)
    gen.add_argument("--seed", type=int, default=None)
    gen.set_defaults(func=_cmd_gen)

    correlate = sub.add_parser("correlate", help="correlation matrix and heatmap plot data")
    correlate.add_argument("--data", required=True)
    correlate.add_argument("--rated-power", dest="rated_power", type=float, default=None)
    correlate.add_argument("--out-dir", dest="out_dir", default=".")
    correlate.set_defaults(func=_cmd_correlate)

    fit = sub.add_parser("fit", help="fit one model and print its evaluation")
    fit.add_argument("--data", required=True)
    fit.add_argument("--model", choices=("persistence", "linear", "polynomial", "ann"), default="linear")
    fit.add_argument("--features", default="speed_direction_temperature")
    fit.add_argument("--degree", type=int, default=None)
    fit.add_argument("--train-fraction", dest="train_fraction", type=float, default=0.85)
    fit.add_argument("--seed", type=int, default=42)
    fit.add_argument("--epochs", type=int, default=20)
    fit.add_argument("--horizon", type=int, default=1, help="persistence steps ahead")
    fit.add_argument("--rated-power", dest="rated_power", type=float, default=None)
    fit.add_argument("--out-dir", dest="out_dir", default=None, help="save the fitted model here")
    fit.set_defaults(func=_cmd_fit)

    sweep = sub.add_parser("sweep", help="run the full experiment grid")
    sweep.add_argument("--data", required=True)
    sweep.add_argument("--seed", type=int, default=42)
    sweep.add_argument(
        "--train-fraction",
        dest="train_fraction",
        default=",".join(str(f) for f in harness.DEFAULT_FRACTIONS),
    )
    sweep.add_argument(
        "--features",
        default=",".join(fs.tag for fs in FeatureSet),
    )
    sweep.add_argument("--degree", default="2,3,4,5")
    sweep.add_argument("--model", default=",".join(harness.MODEL_ORDER))
    sweep.add_argument("--epochs", type=int, default=20)
    sweep.add_argument(
        "--horizons", default=",".join(str(h) for h in harness.DEFAULT_HORIZONS)
    )
    sweep.add_argument("--rated-power", dest="rated_power", type=float, default=None)
    sweep.add_argument("--out-dir", dest="out_dir", default=".")
    sweep.set_defaults(func=_cmd_sweep)

    plot_data = sub.add_parser("plot-data", help="power-curve and pred-vs-actual plot files")
    plot_data.add_argument("--data", required=True)
    plot_data.add_argument("--model", choices=("linear", "polynomial", "ann"), default="linear")
    plot_data.add_argument("--features", default="speed_direction_temperature")
    plot_data.add_argument("--degree", type=int, default=None)
    plot_data.add_argument("--train-fraction", dest="train_fraction", type=float, default=0.85)
    plot_data.add_argument("--seed", type=int, default=42)
    plot_data.add_argument("--epochs", type=int, default=20)
    plot_data.add_argument("--rated-power", dest="rated_power", type=float, default=None)
    plot_data.add_argument("--out-dir", dest="out_dir", default=".")
    plot_data.set_defaults(func=_cmd_plot_data)

    gradcheck = sub.add_parser("gradcheck", help="verify the backward pass numerically")
    gradcheck.add_argument("--seed", type=int, default=0)
    gradcheck.set_defaults(func=_cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
