"""Experiment grid: models x feature subsets x train fractions x degrees.

One split per train fraction is shared by every model so comparisons within
a fraction see identical data. Rows are generated in a fixed (model,
feature_set, fraction, degree) order and failed configurations become
failed-row records instead of aborting the sweep.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np

from . import ann, regression
from .dataset import Dataset, DesignMatrix, FeatureSet, SplitSpec, select_features, split
from .errors import FeatureMismatch, InvalidConfig, SeriesTooShort
from .metrics import EvalReport
from .regression import LinearModel, PolynomialModel

MODEL_ORDER = ("persistence", "linear", "polynomial", "ann")

SWEEP_SCHEMA = "windforecast.sweep.v1"

DEFAULT_FRACTIONS = (0.95, 0.90, 0.85, 0.80, 0.75, 0.70)

# 96 steps of 15 minutes = 24 h ahead; 1 step is the ultra-short horizon.
DEFAULT_HORIZONS = (1, 96)


@dataclass(frozen=True)
class SweepConfig:
    """Grid specification; defaults reproduce the full evaluation tables."""

    train_fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    feature_sets: tuple[FeatureSet, ...] = tuple(FeatureSet)
    degrees: tuple[int, ...] = (2, 3, 4, 5)
    models: tuple[str, ...] = MODEL_ORDER
    seed: int = 42
    ann_train: ann.TrainConfig = ann.TrainConfig(seed=42)
    persistence_horizons: tuple[int, ...] = DEFAULT_HORIZONS

    def __post_init__(self):
        object.__setattr__(self, "train_fractions", tuple(float(f) for f in self.train_fractions))
        object.__setattr__(self, "feature_sets", tuple(self.feature_sets))
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        object.__setattr__(self, "persistence_horizons", tuple(int(h) for h in self.persistence_horizons))
        for f in self.train_fractions:
            if not 0.5 <= f <= 0.99:
                raise InvalidConfig(f"train fraction {f} outside [0.5, 0.99]")
        for d in self.degrees:
            if not regression.MIN_DEGREE <= d <= regression.MAX_DEGREE:
                raise InvalidConfig(f"degree {d} outside [2, 5]")
        unknown = set(self.models) - set(MODEL_ORDER)
        if unknown:
            raise InvalidConfig(f"unknown models {sorted(unknown)}; choose from {MODEL_ORDER}")
        # canonical model order keeps row order deterministic
        object.__setattr__(
            self, "models", tuple(m for m in MODEL_ORDER if m in set(self.models))
        )
        for h in self.persistence_horizons:
            if h < 1:
                raise InvalidConfig(f"persistence horizon must be >= 1, got {h}")


@dataclass(frozen=True)
class SweepRow:
    """Result of one grid configuration; ``error`` is set when the fit failed."""

    model: str
    feature_set: FeatureSet | None
    train_fraction: float | None
    degree: int | None
    horizon: int | None
    report: EvalReport | None
    out_of_bounds_fraction: float | None
    error: str | None = None


def persistence_forecast(d: Dataset, horizon_steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Predict power[i] = power[i - horizon] on the chronological series.

    No shuffling: persistence is a time-structural baseline, so it runs on
    the dataset in timestamp order.
    """
    if horizon_steps < 1:
        raise InvalidConfig(f"horizon_steps must be >= 1, got {horizon_steps}")
    power = d.column("power")
    if len(power) <= horizon_steps:
        raise SeriesTooShort(
            f"dataset has {len(power)} rows, needs more than horizon {horizon_steps}"
        )
    actual = power[horizon_steps:]
    predicted = power[:-horizon_steps]
    return actual, predicted


def predict_with(model, m: DesignMatrix) -> np.ndarray:
    """Dispatch prediction for any fitted model type."""
    if isinstance(model, LinearModel):
        return regression.predict_linear(model, m)
    if isinstance(model, PolynomialModel):
        return regression.predict_polynomial(model, m)
    if isinstance(model, ann.MlpModel):
        return ann.predict(model, m)
    raise FeatureMismatch(f"cannot predict with {type(model).__name__}")


def _scored_row(actual, predicted, rated_power, **fields) -> SweepRow:
    predicted = np.asarray(predicted, dtype=np.float64)
    oob = float(np.mean((predicted < 0) | (predicted > rated_power)))
    return SweepRow(
        report=EvalReport.from_predictions(actual, predicted),
        out_of_bounds_fraction=oob,
        error=None,
        **fields,
    )


def _failed_row(exc: Exception, **fields) -> SweepRow:
    return SweepRow(
        report=None,
        out_of_bounds_fraction=None,
        error=f"{type(exc).__name__}: {exc}",
        **fields,
    )


def run_sweep(d: Dataset, cfg: SweepConfig = SweepConfig()) -> list[SweepRow]:
    """Evaluate every configuration of the grid on held-out test data.

    The split for a given fraction uses the sweep seed and is reused across
    models and feature sets. Identical inputs yield an identical row list.
    """
    split_cache: dict[float, tuple[Dataset, Dataset]] = {}
    matrix_cache: dict[tuple[float, FeatureSet], tuple[DesignMatrix, DesignMatrix]] = {}

    def matrices(fraction: float, fs: FeatureSet) -> tuple[DesignMatrix, DesignMatrix]:
        key = (fraction, fs)
        if key not in matrix_cache:
            if fraction not in split_cache:
                split_cache[fraction] = split(d, SplitSpec(train_fraction=fraction, seed=cfg.seed))
            train_ds, test_ds = split_cache[fraction]
            matrix_cache[key] = (select_features(train_ds, fs), select_features(test_ds, fs))
        return matrix_cache[key]

    rows: list[SweepRow] = []
    for model_name in cfg.models:
        if model_name == "persistence":
            for horizon in cfg.persistence_horizons:
                fields = dict(
                    model="persistence",
                    feature_set=None,
                    train_fraction=None,
                    degree=None,
                    horizon=horizon,
                )
                try:
                    actual, predicted = persistence_forecast(d, horizon)
                    rows.append(_scored_row(actual, predicted, d.rated_power, **fields))
                except Exception as exc:
                    rows.append(_failed_row(exc, **fields))
        elif model_name == "linear":
            for fs in cfg.feature_sets:
                for fraction in cfg.train_fractions:
                    fields = dict(
                        model="linear",
                        feature_set=fs,
                        train_fraction=fraction,
                        degree=None,
                        horizon=None,
                    )
                    try:
                        train_m, test_m = matrices(fraction, fs)
                        model = regression.fit_ols(train_m)
                        predicted = regression.predict_linear(model, test_m)
                        rows.append(_scored_row(test_m.target, predicted, d.rated_power, **fields))
                    except Exception as exc:
                        rows.append(_failed_row(exc, **fields))
        elif model_name == "polynomial":
            for fs in cfg.feature_sets:
                for fraction in cfg.train_fractions:
                    for degree in cfg.degrees:
                        fields = dict(
                            model="polynomial",
                            feature_set=fs,
                            train_fraction=fraction,
                            degree=degree,
                            horizon=None,
                        )
                        try:
                            train_m, test_m = matrices(fraction, fs)
                            model = regression.fit_polynomial(train_m, degree)
                            predicted = regression.predict_polynomial(model, test_m)
                            rows.append(
                                _scored_row(test_m.target, predicted, d.rated_power, **fields)
                            )
                        except Exception as exc:
                            rows.append(_failed_row(exc, **fields))
        elif model_name == "ann":
            for fs in cfg.feature_sets:
                for fraction in cfg.train_fractions:
                    fields = dict(
                        model="ann",
                        feature_set=fs,
                        train_fraction=fraction,
                        degree=None,
                        horizon=None,
                    )
                    try:
                        train_m, test_m = matrices(fraction, fs)
                        net = ann.init_network(train_m.k, seed=cfg.ann_train.seed)
                        trained, _ = ann.train(
                            net, train_m, cfg.ann_train, target_scale=d.rated_power
                        )
                        predicted = ann.predict(trained, test_m)
                        rows.append(_scored_row(test_m.target, predicted, d.rated_power, **fields))
                    except Exception as exc:
                        rows.append(_failed_row(exc, **fields))
    return rows


# -- report writers -----------------------------------------------------------

def _row_dict(row: SweepRow) -> dict:
    report = row.report
    return {
        "model": row.model,
        "feature_set": None if row.feature_set is None else row.feature_set.tag,
        "train_fraction": row.train_fraction,
        "degree": row.degree,
        "horizon": row.horizon,
        "n_test": None if report is None else report.n_samples,
        "mae": None if report is None else report.mae,
        "rmse": None if report is None else report.rmse,
        "r_squared": None if report is None else report.r_squared,
        "out_of_bounds_fraction": row.out_of_bounds_fraction,
        "status": "ok" if row.error is None else row.error,
    }


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def sweep_csv(rows: list[SweepRow]) -> str:
    """Primary report format; first line carries the schema version."""
    import csv as _csv

    buf = io.StringIO()
    buf.write(f"# schema={SWEEP_SCHEMA}\n")
    writer = _csv.writer(buf, lineterminator="\n")
    header = (
        "model",
        "feature_set",
        "train_fraction",
        "degree",
        "horizon",
        "n_test",
        "mae",
        "rmse",
        "r_squared",
        "out_of_bounds_fraction",
        "status",
    )
    writer.writerow(header)
    for row in rows:
        d = _row_dict(row)
        writer.writerow(tuple(_csv_cell(d[name]) for name in header))
    return buf.getvalue()


def sweep_json(rows: list[SweepRow], cfg: SweepConfig) -> str:
    """Structured report format with the generating configuration echoed."""
    doc = {
        "schema": SWEEP_SCHEMA,
        "config": {
            "train_fractions": list(cfg.train_fractions),
            "feature_sets": [fs.tag for fs in cfg.feature_sets],
            "degrees": list(cfg.degrees),
            "models": list(cfg.models),
            "seed": cfg.seed,
            "persistence_horizons": list(cfg.persistence_horizons),
            "ann_train": {
                "epochs": cfg.ann_train.epochs,
                "batch_size": cfg.ann_train.batch_size,
                "learning_rate": cfg.ann_train.learning_rate,
                "seed": cfg.ann_train.seed,
                "optimizer": cfg.ann_train.optimizer,
            },
        },
        "rows": [_row_dict(row) for row in rows],
    }
    return json.dumps(doc, indent=2)


# -- plot-data emitters -------------------------------------------------------

def emit_power_curve_points(model, test: DesignMatrix) -> str:
    """CSV of (wind_speed, actual_power, predicted_power) sorted by speed.

    Enough to regenerate scatter-plus-curve figures for any fitted model.
    """
    if "wind_speed" not in test.feature_names:
        raise FeatureMismatch("test matrix has no wind_speed column")
    speed = test.rows[:, test.feature_names.index("wind_speed")]
    predicted = predict_with(model, test)
    actual = test.target
    order = np.lexsort((predicted, actual, speed))
    buf = io.StringIO()
    buf.write("wind_speed,actual_power,predicted_power\n")
    for i in order:
        buf.write(f"{float(speed[i])!r},{float(actual[i])!r},{float(predicted[i])!r}\n")
    return buf.getvalue()


def emit_pred_vs_actual(model, test: DesignMatrix) -> str:
    """CSV of (actual_power, predicted_power) pairs in test-set order."""
    predicted = predict_with(model, test)
    buf = io.StringIO()
    buf.write("actual_power,predicted_power\n")
    for a, p in zip(test.target, predicted):
        buf.write(f"{float(a)!r},{float(p)!r}\n")
    return buf.getvalue()
