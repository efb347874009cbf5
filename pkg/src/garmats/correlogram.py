"""Sample ACF / PACF and the cut-off vs dies-down reading used for order identification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import ConstantSeries, LagTooLarge, NumericalDegeneracy, SeriesTooShort
from .series import as_series


@dataclass(frozen=True)
class Correlogram:
    """Coefficients by lag.

    For ``kind == "acf"`` ``coefficients[0]`` is lag 0 (always 1); for
    ``"pacf"`` ``coefficients[0]`` is lag 1.
    """

    kind: Literal["acf", "pacf"]
    coefficients: np.ndarray
    n: int
    band: float

    @property
    def lags(self) -> np.ndarray:
        start = 0 if self.kind == "acf" else 1
        return np.arange(start, start + len(self.coefficients))

    def by_lag(self) -> dict[int, float]:
        return dict(zip(self.lags.tolist(), self.coefficients.tolist()))


@dataclass(frozen=True)
class Pattern:
    kind: Literal["cut_off", "dies_down"]
    lag: Optional[int] = None

    def __str__(self) -> str:
        return f"cut_off({self.lag})" if self.kind == "cut_off" else "dies_down"


def default_max_lag(n: int) -> int:
    return max(1, min(int(math.floor(10 * math.log10(n))), n - 1))


def white_noise_band(n: int) -> float:
    return 1.96 / math.sqrt(n)


def _check(x: np.ndarray, max_lag: int) -> None:
    if x.size < 2:
        raise SeriesTooShort("correlations need at least two observations")
    if max_lag < 0 or max_lag >= x.size:
        raise LagTooLarge(f"max_lag must lie in [0, {x.size - 1}], got {max_lag}")


def autocorrelations(x, max_lag: int) -> np.ndarray:
    """ACF values for lags 0..max_lag, denominator summed over all n terms."""
    x = np.asarray(x, dtype=float)
    _check(x, max_lag)
    z = x - x.mean()
    denom = float(z @ z)
    if denom <= 0.0 or denom < 1e-300:
        raise ConstantSeries("series is constant; autocorrelation undefined")
    n = z.size
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = float(z[: n - k] @ z[k:]) / denom
    return out


def durbin_levinson(r: np.ndarray) -> np.ndarray:
    """Partial autocorrelations phi_kk, k=1..len(r), from autocorrelations r_1..r_K."""
    r = np.asarray(r, dtype=float)
    K = r.size
    pacf = np.empty(K)
    phi = np.zeros(0)
    for k in range(1, K + 1):
        if k == 1:
            phi_kk = r[0]
        else:
            num = r[k - 1] - phi @ r[k - 2 :: -1][: k - 1]
            den = 1.0 - phi @ r[: k - 1]
            if abs(den) < 1e-12:
                raise NumericalDegeneracy(f"Durbin-Levinson denominator vanished at lag {k}")
            phi_kk = num / den
            phi = phi - phi_kk * phi[::-1]
        phi = np.append(phi, phi_kk)
        pacf[k - 1] = phi_kk
    return pacf


def acf(s, max_lag: Optional[int] = None) -> Correlogram:
    x = as_series(s).values
    if max_lag is None:
        max_lag = default_max_lag(x.size)
    coef = autocorrelations(x, max_lag)
    return Correlogram("acf", coef, x.size, white_noise_band(x.size))


def pacf(s, max_lag: Optional[int] = None) -> Correlogram:
    x = as_series(s).values
    if max_lag is None:
        max_lag = default_max_lag(x.size)
    if max_lag < 1:
        raise LagTooLarge("pacf needs max_lag >= 1")
    r = autocorrelations(x, max_lag)[1:]
    return Correlogram("pacf", durbin_levinson(r), x.size, white_noise_band(x.size))


def classify_pattern(c: Correlogram, max_cutoff_lag: int = 5) -> Pattern:
    """Read a correlogram as ``cut_off(L)`` or ``dies_down``.

    ``L`` is the last lag whose coefficient lies outside the band. The drop is
    called a cut-off only when ``L <= max_cutoff_lag``; a longer run of
    significant lags is treated as gradual decay.
    """
    coef = np.asarray(c.coefficients, dtype=float)
    lags = c.lags
    if c.kind == "acf":
        coef, lags = coef[1:], lags[1:]
    outside = np.flatnonzero(np.abs(coef) > c.band)
    if outside.size == 0:
        return Pattern("cut_off", 0)
    last = int(lags[outside[-1]])
    if last <= max_cutoff_lag:
        return Pattern("cut_off", last)
    return Pattern("dies_down")
