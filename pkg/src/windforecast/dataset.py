"""Ingest, synthesis, splitting and scaling of 15-minute wind-farm time series.

All random draws in this package go through numpy's PCG64 generator so that
every split, synthetic dataset and weight initialisation is reproducible from
a 64-bit seed, on any platform. Shuffles are Fisher-Yates as implemented by
``numpy.random.Generator.permutation``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum
from typing import Iterable

import numpy as np
from scipy.special import ndtr

from .errors import (
    DegenerateSplit,
    EmptyInput,
    InvalidConfig,
    MalformedHeader,
    NonMonotonicTimestamps,
    RowParseError,
)

CSV_HEADER = ("timestamp", "wind_speed", "wind_direction", "temperature", "power")

# Ratio of observed power to rated power above which a row is rejected.
OVERPOWER_TOLERANCE = 1.05


def _rng(seed: int) -> np.random.Generator:
    """The package-wide PRNG: PCG64 seeded with a 64-bit integer."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, slots=True)
class Record:
    """One SCADA sample: 15-minute timestamp, speed (m/s), direction (deg),
    temperature (degC), generated power (kW).

    Records are plain value objects; invariants are enforced when a
    ``Dataset`` is built.
    """

    timestamp: datetime
    wind_speed: float
    wind_direction: float
    temperature: float
    power: float


def record_problems(r: Record, rated_power: float | None = None) -> list[str]:
    """Invariant violations for one record, as human-readable reasons."""
    problems = []
    for name in ("wind_speed", "wind_direction", "temperature", "power"):
        if not math.isfinite(getattr(r, name)):
            problems.append(f"{name} is not finite")
    if r.wind_speed < 0:
        problems.append(f"wind_speed {r.wind_speed} < 0")
    if not 0 <= r.wind_direction < 360:
        problems.append(f"wind_direction {r.wind_direction} outside [0, 360)")
    if r.power < 0:
        problems.append(f"power {r.power} < 0")
    elif rated_power is not None and r.power > OVERPOWER_TOLERANCE * rated_power:
        problems.append(f"power {r.power} exceeds rated power {rated_power} by more than 5%")
    return problems


class Dataset:
    """Ordered, validated wind-farm samples plus the plant's rated power.

    Immutable after construction; column arrays are cached on first access
    and marked read-only, so instances are safe to share across threads.
    """

    def __init__(self, records: Iterable[Record], rated_power: float):
        records = tuple(records)
        if not records:
            raise EmptyInput("dataset has no records")
        rated_power = float(rated_power)
        if not rated_power > 0:
            raise InvalidConfig(f"rated_power must be > 0, got {rated_power}")
        failures = []
        for i, r in enumerate(records, start=1):
            for reason in record_problems(r, rated_power):
                failures.append((i, reason))
        if failures:
            raise RowParseError(failures)
        for prev, cur in zip(records, records[1:]):
            if cur.timestamp <= prev.timestamp:
                raise NonMonotonicTimestamps(
                    f"timestamp {cur.timestamp.isoformat()} does not increase past "
                    f"{prev.timestamp.isoformat()}"
                )
        self._records = records
        self._rated_power = rated_power
        self._columns: dict[str, np.ndarray] | None = None

    @property
    def records(self) -> tuple[Record, ...]:
        return self._records

    @property
    def rated_power(self) -> float:
        return self._rated_power

    def __len__(self) -> int:
        return len(self._records)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self._rated_power == other._rated_power and self._records == other._records

    def __repr__(self) -> str:
        return f"Dataset(n={len(self)}, rated_power={self._rated_power})"

    def column(self, name: str) -> np.ndarray:
        """Read-only float64 array for one of the four numeric columns."""
        if self._columns is None:
            cols = {
                field: np.array([getattr(r, field) for r in self._records], dtype=np.float64)
                for field in CSV_HEADER[1:]
            }
            for arr in cols.values():
                arr.setflags(write=False)
            self._columns = cols
        return self._columns[name]


class FeatureSet(Enum):
    """Which regressor columns feed a model; wind speed is always first."""

    SPEED_ONLY = ("wind_speed",)
    SPEED_DIRECTION = ("wind_speed", "wind_direction")
    SPEED_TEMPERATURE = ("wind_speed", "temperature")
    SPEED_DIRECTION_TEMPERATURE = ("wind_speed", "wind_direction", "temperature")

    @property
    def columns(self) -> tuple[str, ...]:
        return self.value

    @property
    def tag(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "FeatureSet":
        key = text.strip().lower()
        aliases = {
            "speed": cls.SPEED_ONLY,
            "speed_direction": cls.SPEED_DIRECTION,
            "speed_temperature": cls.SPEED_TEMPERATURE,
            "speed_direction_temperature": cls.SPEED_DIRECTION_TEMPERATURE,
        }
        for fs in cls:
            aliases.setdefault(fs.name.lower(), fs)
        if key not in aliases:
            raise InvalidConfig(
                f"unknown feature set {text!r}; choose from {sorted(set(aliases))}"
            )
        return aliases[key]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DesignMatrix:
    """Numeric feature matrix (n x k) with its kW target vector."""

    rows: np.ndarray
    target: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", _readonly(np.atleast_2d(self.rows)))
        object.__setattr__(self, "target", _readonly(np.ravel(self.target)))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        n, k = self.rows.shape
        if n != self.target.shape[0]:
            raise InvalidConfig(f"rows has {n} rows but target has {self.target.shape[0]}")
        if k != len(self.feature_names):
            raise InvalidConfig(f"{k} columns but {len(self.feature_names)} feature names")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def k(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class SplitSpec:
    """Shuffled train/test split: fraction in [0.5, 0.99] plus a seed."""

    train_fraction: float
    seed: int

    def __post_init__(self):
        if not 0.5 <= self.train_fraction <= 0.99:
            raise InvalidConfig(
                f"train_fraction must lie in [0.5, 0.99], got {self.train_fraction}"
            )


@dataclass(frozen=True)
class MinMaxScaler:
    """Per-feature [0, 1] scaling; a constant feature maps to 0 everywhere."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mins", _readonly(self.mins))
        object.__setattr__(self, "maxs", _readonly(self.maxs))
        if self.mins.shape != self.maxs.shape:
            raise InvalidConfig("mins and maxs must have matching shapes")
        if np.any(self.maxs < self.mins):
            raise InvalidConfig("max < min for at least one feature")

    @property
    def spans(self) -> np.ndarray:
        span = self.maxs - self.mins
        return np.where(span == 0, 1.0, span)

    def transform_array(self, x: np.ndarray) -> np.ndarray:
        scaled = (np.asarray(x, dtype=np.float64) - self.mins) / self.spans
        # constant feature: span forced to 1 above, numerator is 0 on the
        # training range; zero it explicitly so unseen values also map to 0
        constant = self.maxs == self.mins
        if np.any(constant):
            scaled = np.where(constant, 0.0, scaled)
        return scaled

    def inverse_array(self, x: np.ndarray) -> np.ndarray:
        span = np.where(self.maxs == self.mins, 0.0, self.spans)
        return np.asarray(x, dtype=np.float64) * span + self.mins


def fit_scaler(m: DesignMatrix) -> MinMaxScaler:
    """Column minima/maxima of a training matrix. Fit on the train split only."""
    return MinMaxScaler(mins=m.rows.min(axis=0), maxs=m.rows.max(axis=0))


def apply_scaler(s: MinMaxScaler, m: DesignMatrix) -> DesignMatrix:
    """Map each feature through (x - min) / (max - min); target untouched."""
    if len(s.mins) != m.k:
        raise InvalidConfig(f"scaler has {len(s.mins)} features, matrix has {m.k}")
    return DesignMatrix(rows=s.transform_array(m.rows), target=m.target, feature_names=m.feature_names)


def invert_scaler(s: MinMaxScaler, m: DesignMatrix) -> DesignMatrix:
    """Undo ``apply_scaler``; identity within 1e-12 relative on the fit range."""
    if len(s.mins) != m.k:
        raise InvalidConfig(f"scaler has {len(s.mins)} features, matrix has {m.k}")
    return DesignMatrix(rows=s.inverse_array(m.rows), target=m.target, feature_names=m.feature_names)


@dataclass(frozen=True)
class SyntheticConfig:
    """Parameters of the synthetic plant.

    Defaults produce a 2 MW turbine whose cubic region caps at rated power
    just below the rated speed, giving the familiar sigmoid-shaped curve.
    """

    n_samples: int = 30090
    cut_in_speed: float = 3.0
    rated_speed: float = 12.0
    cut_out_speed: float = 25.0
    rated_power: float = 2000.0
    air_density: float = 1.225
    rotor_area: float = 5000.0
    power_coefficient: float = 0.45
    noise_sd: float = 40.0
    seed: int = 42

    def __post_init__(self):
        if self.n_samples < 1:
            raise InvalidConfig("n_samples must be >= 1")
        if not 0 < self.cut_in_speed < self.rated_speed < self.cut_out_speed:
            raise InvalidConfig(
                "need 0 < cut_in_speed < rated_speed < cut_out_speed, got "
                f"{self.cut_in_speed}, {self.rated_speed}, {self.cut_out_speed}"
            )
        if not 0 < self.power_coefficient <= 0.59:
            raise InvalidConfig(
                f"power_coefficient must lie in (0, 0.59], got {self.power_coefficient}"
            )
        if self.rated_power <= 0 or self.air_density <= 0 or self.rotor_area <= 0:
            raise InvalidConfig("rated_power, air_density and rotor_area must be > 0")
        if self.noise_sd < 0:
            raise InvalidConfig("noise_sd must be >= 0")


def power_curve(config: SyntheticConfig, v) -> np.ndarray:
    """Deterministic turbine curve in kW for wind speed ``v`` (scalar or array).

    Zero below cut-in and above cut-out; the cubic kinetic-energy law capped
    at rated power on [cut_in, rated]; rated power on (rated, cut_out].
    """
    v = np.asarray(v, dtype=np.float64)
    cubic = 0.5 * config.air_density * config.power_coefficient * config.rotor_area * (v * v * v) / 1000.0
    ramp = (v >= config.cut_in_speed) & (v <= config.rated_speed)
    plateau = (v > config.rated_speed) & (v <= config.cut_out_speed)
    return np.where(
        ramp,
        np.minimum(cubic, config.rated_power),
        np.where(plateau, config.rated_power, 0.0),
    )


# Wind speeds are Weibull with shape 2 (Rayleigh) and scale 2/3 of the rated
# speed: mean speed ~ 0.59 * rated, a typical onshore siting.
WEIBULL_SHAPE = 2.0
WEIBULL_SCALE_RATIO = 2.0 / 3.0

# Lag-1 autocorrelation of the latent Gaussian driving wind speed. 0.97 per
# 15-minute step decays to ~0.05 over 24 h, so short-horizon persistence
# forecasting works and day-ahead persistence does not.
AR1_PHI = 0.97

_SYNTHETIC_EPOCH = datetime(2019, 1, 1)
_GRID = timedelta(minutes=15)


def _autocorrelated_speeds(rng: np.random.Generator, n: int, scale: float) -> np.ndarray:
    """Stationary AR(1) Gaussian mapped through a Weibull marginal.

    The Gaussian copula keeps the marginal distribution exactly Weibull
    while giving the series the strong short-range persistence of real wind.
    """
    eps = rng.standard_normal(n)
    z = np.empty(n)
    z[0] = eps[0]
    innovation = math.sqrt(1.0 - AR1_PHI**2)
    for t in range(1, n):
        z[t] = AR1_PHI * z[t - 1] + innovation * eps[t]
    u = ndtr(z)
    # inverse Weibull CDF; log1p keeps precision for u near 0
    return scale * (-np.log1p(-u)) ** (1.0 / WEIBULL_SHAPE)


def generate_synthetic(config: SyntheticConfig = SyntheticConfig()) -> Dataset:
    """Synthesize a plausible 15-minute SCADA series from the turbine curve.

    Draw order is fixed (speed, direction, temperature noise, power noise) so
    a given config and seed always yields a byte-identical dataset. Direction
    is uniform on [0, 360); temperature follows a seasonal sinusoid plus
    2 degC noise, independent of speed, so its correlation with power is
    negligible. Gaussian noise on power is clamped to
    [0, 1.05 * rated_power] to keep every row within dataset invariants.
    """
    rng = _rng(config.seed)
    n = config.n_samples
    v = _autocorrelated_speeds(rng, n, WEIBULL_SCALE_RATIO * config.rated_speed)
    direction = rng.uniform(0.0, 360.0, n)
    day = np.arange(n) * (15.0 / (60.0 * 24.0))
    temperature = 20.0 + 8.0 * np.sin(2.0 * np.pi * day / 365.25) + rng.normal(0.0, 2.0, n)
    power = power_curve(config, v)
    if config.noise_sd > 0:
        power = power + rng.normal(0.0, config.noise_sd, n)
    power = np.clip(power, 0.0, OVERPOWER_TOLERANCE * config.rated_power)
    records = [
        Record(
            timestamp=_SYNTHETIC_EPOCH + i * _GRID,
            wind_speed=float(v[i]),
            wind_direction=float(direction[i]),
            temperature=float(temperature[i]),
            power=float(power[i]),
        )
        for i in range(n)
    ]
    return Dataset(records, rated_power=config.rated_power)


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Seeded random partition into train and test datasets.

    Indices are shuffled with a PCG64 permutation; the first
    floor(n * train_fraction) shuffled indices form the train set. Each side
    keeps its records in chronological order so both remain valid Datasets.
    """
    n = len(dataset)
    n_train = int(math.floor(n * spec.train_fraction))
    if n_train == 0 or n_train == n:
        raise DegenerateSplit(
            f"fraction {spec.train_fraction} of {n} rows leaves an empty train or test side"
        )
    perm = _rng(spec.seed).permutation(n)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    records = dataset.records
    train = Dataset((records[i] for i in train_idx), dataset.rated_power)
    test = Dataset((records[i] for i in test_idx), dataset.rated_power)
    return train, test


def select_features(dataset: Dataset, fs: FeatureSet) -> DesignMatrix:
    """Project the chosen feature columns; target is always the power column."""
    rows = np.column_stack([dataset.column(name) for name in fs.columns])
    return DesignMatrix(rows=rows, target=dataset.column("power"), feature_names=fs.columns)


def _format_number(x: float) -> str:
    # repr gives the shortest string that round-trips the float64 exactly
    return repr(float(x))


def write_csv(dataset: Dataset, stream=None) -> str:
    """Serialize to the canonical CSV format; parse_csv inverts it exactly."""
    buf = stream if stream is not None else io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in dataset.records:
        writer.writerow(
            (
                r.timestamp.isoformat(),
                _format_number(r.wind_speed),
                _format_number(r.wind_direction),
                _format_number(r.temperature),
                _format_number(r.power),
            )
        )
    return buf.getvalue() if stream is None else ""


def parse_csv(source, rated_power: float | None = None) -> Dataset:
    """Parse the canonical CSV format into a validated Dataset.

    ``source`` may be a str, bytes, or a readable text/binary stream; content
    must be UTF-8 with header ``timestamp,wind_speed,wind_direction,
    temperature,power`` and ISO-8601 timestamps. Any row that fails to parse
    or violates record invariants rejects the whole file via RowParseError,
    with 1-based data-row numbers. When ``rated_power`` is omitted it is
    taken as the maximum observed power.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    lines = source.splitlines()
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyInput("no content") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise MalformedHeader(f"expected header {','.join(CSV_HEADER)!r}, got {','.join(header)!r}")

    records: list[Record] = []
    failures: list[tuple[int, str]] = []
    for i, fields in enumerate(reader, start=1):
        if not fields:
            continue
        if len(fields) != len(CSV_HEADER):
            failures.append((i, f"expected {len(CSV_HEADER)} fields, got {len(fields)}"))
            continue
        try:
            ts = datetime.fromisoformat(fields[0].strip())
        except ValueError:
            failures.append((i, f"bad timestamp {fields[0]!r}"))
            continue
        values = {}
        bad = False
        for name, raw in zip(CSV_HEADER[1:], fields[1:]):
            try:
                values[name] = float(raw)
            except ValueError:
                failures.append((i, f"bad {name} value {raw!r}"))
                bad = True
        if bad:
            continue
        record = Record(timestamp=ts, **values)
        problems = record_problems(record, rated_power)
        if problems:
            failures.extend((i, p) for p in problems)
            continue
        records.append(record)

    if failures:
        raise RowParseError(failures)
    if not records:
        raise EmptyInput("no data rows")
    if rated_power is None:
        rated_power = max(r.power for r in records)
        if rated_power <= 0:
            rated_power = 1.0
    return Dataset(records, rated_power=rated_power)
