"""Augmented Dickey-Fuller unit-root test (constant + linear trend)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import InputError, SeriesTooShort, SingularRegression
from .series import as_series

# Dickey-Fuller tau quantiles for the regression with constant and trend
# (Fuller 1976, Table 8.5.2), rows are sample sizes, columns probabilities.
TAU_TREND_SIZES = np.array([25.0, 50.0, 100.0, 250.0, 500.0, 100000.0])
TAU_TREND_PROBS = np.array([0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99])
TAU_TREND_TABLE = -np.array(
    [
        [4.38, 3.95, 3.60, 3.24, 1.14, 0.80, 0.50, 0.15],
        [4.15, 3.80, 3.50, 3.18, 1.19, 0.87, 0.58, 0.24],
        [4.04, 3.73, 3.45, 3.15, 1.22, 0.90, 0.62, 0.28],
        [3.99, 3.69, 3.43, 3.13, 1.23, 0.92, 0.64, 0.31],
        [3.98, 3.68, 3.42, 3.13, 1.24, 0.93, 0.65, 0.32],
        [3.96, 3.66, 3.41, 3.12, 1.25, 0.94, 0.66, 0.33],
    ]
)


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    lag_order: int
    p_value: float
    clamped: Literal["low", "high", "none"]
    n_used: int
    regression: str = "constant+trend"

    def as_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "lag_order": self.lag_order,
            "p_value": self.p_value,
            "clamped": self.clamped,
            "n_used": self.n_used,
            "regression": self.regression,
        }


def default_lag(n: int) -> int:
    return int(math.floor((n - 1) ** (1.0 / 3.0)))


def tau_p_value(statistic: float, n: int) -> tuple[float, str]:
    """Interpolated p-value, clamped to the table's [0.01, 0.99] range.

    The quantile row for ``n`` is linearly interpolated between tabulated
    sample sizes (held constant outside), then the statistic is located in it.
    """
    row = np.array(
        [np.interp(n, TAU_TREND_SIZES, TAU_TREND_TABLE[:, j]) for j in range(TAU_TREND_PROBS.size)]
    )
    if statistic < row[0]:
        return float(TAU_TREND_PROBS[0]), "low"
    if statistic > row[-1]:
        return float(TAU_TREND_PROBS[-1]), "high"
    return float(np.interp(statistic, row, TAU_TREND_PROBS)), "none"


def adf_test(s, lag_order: Optional[int] = None) -> AdfResult:
    """Fit dx_t = a + b t + g x_{t-1} + sum_i d_i dx_{t-i} by OLS; tau = g / se(g)."""
    x = as_series(s).values
    n = x.size
    k = default_lag(n) if lag_order is None else int(lag_order)
    if k < 0:
        raise InputError("lag_order must be non-negative")
    if n < k + 10:
        raise SeriesTooShort(f"ADF with {k} lags needs at least {k + 10} observations, got {n}")

    dx = np.diff(x)
    m = dx.size  # also the sample size used for the table lookup
    rows = m - k
    y = dx[k:]
    cols = [np.ones(rows), np.arange(k + 1, m + 1, dtype=float), x[k:m]]
    for i in range(1, k + 1):
        cols.append(dx[k - i : m - i])
    X = np.column_stack(cols)
    if rows <= X.shape[1]:
        raise SeriesTooShort("not enough observations for the ADF regression")

    # Scale columns so the rank check is not fooled by the trend's magnitude.
    scale = np.sqrt((X**2).sum(axis=0))
    if np.any(scale == 0.0):
        raise SingularRegression("ADF design has an all-zero column")
    Xs = X / scale
    if np.linalg.matrix_rank(Xs, tol=1e-10 * math.sqrt(rows)) < X.shape[1]:
        raise SingularRegression("ADF design matrix is collinear (constant series?)")
    coef, _, _, _ = np.linalg.lstsq(Xs, y, rcond=None)
    resid = y - Xs @ coef
    dof = rows - X.shape[1]
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(Xs.T @ Xs)
    se_gamma = math.sqrt(cov[2, 2])
    if se_gamma == 0.0:
        raise SingularRegression("zero standard error on the lagged level")
    stat = float(coef[2] / se_gamma)
    p, clamped = tau_p_value(stat, m)
    return AdfResult(stat, k, p, clamped, m)


def is_stationary(r: AdfResult, alpha: float = 0.05) -> bool:
    if not 0.0 < alpha < 1.0:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    return r.p_value < alpha
