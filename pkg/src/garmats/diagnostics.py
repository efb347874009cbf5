"""Ljung-Box test, AIC, MAE/RMSE and AIC-based model ranking."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaincc

from .correlogram import autocorrelations
from .errors import DegenerateDf, EmptyInput, InputError, LengthMismatch, SeriesTooShort
from .series import as_series


@dataclass(frozen=True)
class LjungBoxResult:
    q_stat: float
    df: int
    p_value: float
    lags_used: int
    fitted_params_adjustment: int

    def as_dict(self) -> dict:
        return {
            "q_stat": self.q_stat,
            "df": self.df,
            "p_value": self.p_value,
            "lags_used": self.lags_used,
            "fitted_params_adjustment": self.fitted_params_adjustment,
        }


@dataclass(frozen=True)
class EvalReport:
    model_label: str
    mae: float
    rmse: float
    aic: float
    ljung_box: Optional[LjungBoxResult] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mae < 0 or self.rmse < 0:
            raise InputError("error measures must be non-negative")


def chi2_sf(x: float, df: int) -> float:
    """Upper tail of the chi-square distribution (regularized upper incomplete gamma)."""
    if x <= 0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


def ljung_box(residuals, lags: int = 10, fitted_params: int = 0) -> LjungBoxResult:
    e = as_series(residuals).values
    n = e.size
    if lags <= fitted_params:
        raise DegenerateDf(f"lags ({lags}) must exceed fitted parameters ({fitted_params})")
    if n <= lags + 1:
        raise SeriesTooShort(f"{n} residuals are too few for {lags} lags")
    z = e - e.mean()
    if not np.any(z):
        rho = np.zeros(lags)
    else:
        rho = autocorrelations(e, lags)[1:]
    k = np.arange(1, lags + 1)
    q = float(n * (n + 2) * np.sum(rho**2 / (n - k)))
    df = lags - fitted_params
    return LjungBoxResult(q, df, chi2_sf(q, df), lags, fitted_params)


def aic(loglik: float, k: int) -> float:
    if k < 0:
        raise InputError("parameter count must be non-negative")
    return 2.0 * k - 2.0 * loglik


def _errors(predicted, actual) -> np.ndarray:
    pred = np.asarray(predicted, dtype=float).ravel()
    act = np.asarray(actual, dtype=float).ravel()
    if pred.size != act.size:
        raise LengthMismatch(f"{pred.size} predictions for {act.size} actual values")
    if pred.size == 0:
        raise EmptyInput("no values to compare")
    return pred - act


def mae(predicted, actual) -> float:
    return float(np.mean(np.abs(_errors(predicted, actual))))


def rmse(predicted, actual) -> float:
    # Root of the mean *squared* error.
    e = _errors(predicted, actual)
    return math.sqrt(float(np.mean(e * e)))


def rank_models(reports: Sequence[EvalReport]) -> list[EvalReport]:
    """Ascending AIC; ties go to lower RMSE, then MAE, then label."""
    if not reports:
        raise EmptyInput("no models to rank")
    return sorted(reports, key=lambda r: (r.aic, r.rmse, r.mae, r.model_label))
