"""The three evaluation metrics, computed identically for every model.

Sums run through numpy's pairwise summation in double precision, which is
stable on 30k-row inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstantActual, Empty, LengthMismatch


def _paired(actual, predicted) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=np.float64).ravel()
    p = np.asarray(predicted, dtype=np.float64).ravel()
    if a.shape != p.shape:
        raise LengthMismatch(f"length {a.shape[0]} vs {p.shape[0]}")
    return a, p


def mae(actual, predicted) -> float:
    """Mean absolute deviation between actuals and predictions, in kW."""
    a, p = _paired(actual, predicted)
    if a.size == 0:
        raise Empty("mae needs at least one sample")
    return float(np.mean(np.abs(a - p)))


def rmse(actual, predicted) -> float:
    """Root mean squared deviation, in kW."""
    a, p = _paired(actual, predicted)
    if a.size == 0:
        raise Empty("rmse needs at least one sample")
    return float(np.sqrt(np.mean((a - p) ** 2)))


def r_squared(actual, predicted) -> float:
    """1 - SS_res/SS_tot about the mean of the actuals.

    1 is a perfect fit, 0 matches the mean predictor, negative values are
    allowed (worse than the mean). Constant actuals are rejected rather
    than returning NaN.
    """
    a, p = _paired(actual, predicted)
    if a.size == 0:
        raise Empty("r_squared needs at least one sample")
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0.0:
        raise ConstantActual("actual values are constant; R^2 is undefined")
    ss_res = float(np.sum((a - p) ** 2))
    return 1.0 - ss_res / ss_tot


@dataclass(frozen=True)
class EvalReport:
    """MAE, RMSE and R^2 for one model on one evaluation set."""

    mae: float
    rmse: float
    r_squared: float
    n_samples: int

    @classmethod
    def from_predictions(cls, actual, predicted) -> "EvalReport":
        a, p = _paired(actual, predicted)
        return cls(
            mae=mae(a, p),
            rmse=rmse(a, p),
            r_squared=r_squared(a, p),
            n_samples=int(a.size),
        )
