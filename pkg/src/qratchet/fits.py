"""Least-squares line fits shared by the quantum and classical analyses."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def line_fit(x, y) -> FitResult:
    """Ordinary least squares ``y = slope x + intercept``.

    ``r_squared`` is reported as 0 for a constant ``y`` (undefined otherwise).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 0.0 if ss_tot == 0.0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    return FitResult(float(slope), float(intercept), r2, len(x))
