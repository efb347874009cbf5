"""ARMA(p, q) simulation, exact Gaussian maximum likelihood and forecasting.

Sign convention: the MA part is *subtracted*,

    X_t - mu = sum_i phi_i (X_{t-i} - mu) + e_t - sum_j theta_j e_{t-j},

so ``theta`` here is the negative of the MA coefficients reported by
packages that use the additive form ``e_t + sum_j b_j e_{t-j}``.  Use
:func:`additive_ma` to convert.

The likelihood is evaluated exactly with a Kalman filter on the Harvey
state-space form; the unconditional initial state covariance is obtained by
solving the discrete Lyapunov equation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import optimize, signal

from . import _numdiff
from .errors import (
    ConstantSeries,
    IndexOutOfRange,
    InputError,
    NonInvertibleParams,
    NonStationaryParams,
    TooFewObservations,
)
from .series import TimeSeries, as_series

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ArmaSpec:
    p: int = 0
    q: int = 0
    include_mean: bool = True

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise InputError("orders must be non-negative")
        if self.p + self.q + int(self.include_mean) < 1:
            raise InputError("ARMA(0,0) without a mean has nothing to estimate")

    @property
    def label(self) -> str:
        if self.p and not self.q:
            return f"AR({self.p})"
        if self.q and not self.p:
            return f"MA({self.q})"
        return f"ARMA({self.p},{self.q})"

    @property
    def n_coef(self) -> int:
        """Estimated parameters including the mean (if any) and sigma2."""
        return self.p + self.q + int(self.include_mean) + 1


@dataclass(frozen=True)
class ArmaParams:
    phi: np.ndarray = field(default_factory=lambda: np.zeros(0))
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mean: float = 0.0
    sigma2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "phi", np.atleast_1d(np.asarray(self.phi, dtype=float)))
        object.__setattr__(self, "theta", np.atleast_1d(np.asarray(self.theta, dtype=float)))


@dataclass(frozen=True)
class ArmaFit:
    spec: ArmaSpec
    phi: np.ndarray
    theta: np.ndarray
    mean: float
    sigma2: float
    loglik: float
    se: dict
    n_obs: int
    converged: bool
    init_loglik: float = float("nan")
    message: str = ""

    @property
    def params(self) -> ArmaParams:
        return ArmaParams(self.phi, self.theta, self.mean, self.sigma2)

    @property
    def n_coef(self) -> int:
        return self.spec.n_coef

    def coefficients(self) -> dict[str, float]:
        out = {f"ar{i + 1}": float(v) for i, v in enumerate(self.phi)}
        out.update({f"ma{j + 1}": float(v) for j, v in enumerate(self.theta)})
        if self.spec.include_mean:
            out["mean"] = float(self.mean)
        out["sigma2"] = float(self.sigma2)
        return out

    def coefficient_table(self) -> list[dict]:
        return [
            {"term": name, "estimate": value, "std_error": _none_if_nan(self.se.get(name))}
            for name, value in self.coefficients().items()
        ]


def _none_if_nan(x):
    if x is None or not np.isfinite(x):
        return None
    return float(x)


def additive_ma(theta) -> np.ndarray:
    """MA coefficients in the ``e_t + sum b_j e_{t-j}`` convention."""
    return -np.asarray(theta, dtype=float)


# -- parameter checks and transforms -------------------------------------------------


def _max_inverse_root(coef: np.ndarray) -> float:
    """Largest modulus among inverse roots of 1 - c_1 z - ... - c_k z^k."""
    if coef.size == 0 or not np.any(coef):
        return 0.0
    return float(np.max(np.abs(np.roots(np.r_[1.0, -coef]))))


def check_params(spec: ArmaSpec, params: ArmaParams) -> None:
    if params.phi.size != spec.p or params.theta.size != spec.q:
        raise InputError(
            f"{spec.label} needs {spec.p} AR and {spec.q} MA coefficients, "
            f"got {params.phi.size} and {params.theta.size}"
        )
    if not params.sigma2 > 0:
        raise InputError("sigma2 must be positive")
    if _max_inverse_root(params.phi) >= 1.0:
        raise NonStationaryParams(f"AR coefficients {params.phi} are not stationary")
    if _max_inverse_root(params.theta) >= 1.0:
        raise NonInvertibleParams(f"MA coefficients {params.theta} are not invertible")


def pacf_to_coef(r: np.ndarray) -> np.ndarray:
    """Map partial autocorrelations in (-1, 1) to coefficients of a stable polynomial."""
    phi = np.zeros(0)
    for rk in r:
        phi = np.append(phi - rk * phi[::-1], rk)
    return phi


def coef_to_pacf(phi: np.ndarray) -> np.ndarray:
    """Inverse of :func:`pacf_to_coef` (step-down recursion)."""
    phi = np.asarray(phi, dtype=float).copy()
    k = phi.size
    r = np.zeros(k)
    for j in range(k, 0, -1):
        rj = phi[j - 1]
        r[j - 1] = rj
        if j > 1:
            prev = phi[: j - 1]
            phi = (prev + rj * prev[::-1]) / (1.0 - rj * rj)
    return r


def _to_unconstrained(coef: np.ndarray, cap: float = 0.99) -> np.ndarray:
    r = np.clip(coef_to_pacf(coef), -cap, cap)
    return np.arctanh(r)


def _from_unconstrained(u: np.ndarray) -> np.ndarray:
    return pacf_to_coef(np.tanh(u))


# -- state space ---------------------------------------------------------------------


def _padded(phi: np.ndarray, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """AR coefficients and additive MA coefficients padded to the state dimension."""
    p, q = phi.size, theta.size
    r = max(p, q + 1)
    phi_pad = np.zeros(r)
    phi_pad[:p] = phi
    ma_pad = np.zeros(r)
    ma_pad[0] = 1.0
    ma_pad[1 : q + 1] = -theta
    return phi_pad, ma_pad


def initial_state_cov(phi_pad: np.ndarray, ma_pad: np.ndarray) -> np.ndarray:
    """Stationary state covariance (unit innovation variance): P = T P T' + R R'."""
    r = phi_pad.size
    T = np.eye(r, k=1)
    T[:, 0] = phi_pad
    RR = np.outer(ma_pad, ma_pad)
    if not np.any(phi_pad):
        # Nilpotent transition: the series terminates after r terms.
        P = np.zeros((r, r))
        Tk = np.eye(r)
        for _ in range(r):
            P += Tk @ RR @ Tk.T
            Tk = T @ Tk
        return P
    A = np.eye(r * r) - np.kron(T, T)
    P = np.linalg.solve(A, RR.reshape(-1)).reshape(r, r)
    return 0.5 * (P + P.T)


@njit(cache=True)
def _kalman(w, phi_pad, ma_pad, P0):
    """Innovations v_t, their scaled variances F_t and the predicted state for n+1."""
    n = w.shape[0]
    r = phi_pad.shape[0]
    a = np.zeros(r)
    P = P0.copy()
    v = np.empty(n)
    F = np.empty(n)
    af = np.empty(r)
    Pf = np.empty((r, r))
    TP = np.empty((r, r))
    for t in range(n):
        ft = P[0, 0]
        vt = w[t] - a[0]
        v[t] = vt
        F[t] = ft
        if ft > 0.0:
            for i in range(r):
                af[i] = a[i] + P[i, 0] * vt / ft
            for i in range(r):
                for j in range(r):
                    Pf[i, j] = P[i, j] - P[i, 0] * P[0, j] / ft
        else:
            for i in range(r):
                af[i] = a[i]
                for j in range(r):
                    Pf[i, j] = P[i, j]
        # a <- T af ; P <- T Pf T' + R R'
        for i in range(r):
            nxt = af[i + 1] if i + 1 < r else 0.0
            a[i] = phi_pad[i] * af[0] + nxt
        for i in range(r):
            for j in range(r):
                nxt = Pf[i + 1, j] if i + 1 < r else 0.0
                TP[i, j] = phi_pad[i] * Pf[0, j] + nxt
        for i in range(r):
            for j in range(r):
                nxt = TP[i, j + 1] if j + 1 < r else 0.0
                P[i, j] = TP[i, 0] * phi_pad[j] + nxt + ma_pad[i] * ma_pad[j]
    return v, F, a


@njit(cache=True)
def _css_residuals(w, phi, theta):
    n = w.shape[0]
    p = phi.shape[0]
    q = theta.shape[0]
    e = np.zeros(n)
    for t in range(p, n):
        val = w[t]
        for i in range(p):
            val -= phi[i] * w[t - i - 1]
        for j in range(q):
            if t - j - 1 >= p:
                val += theta[j] * e[t - j - 1]
        e[t] = val
    return e


def _filter(w: np.ndarray, phi: np.ndarray, theta: np.ndarray):
    phi_pad, ma_pad = _padded(phi, theta)
    P0 = initial_state_cov(phi_pad, ma_pad)
    return _kalman(np.ascontiguousarray(w, dtype=float), phi_pad, ma_pad, P0)


def _loglik_parts(w: np.ndarray, phi: np.ndarray, theta: np.ndarray) -> tuple[float, float]:
    """(sum log F_t, sum v_t^2 / F_t) at unit innovation variance."""
    v, F, _ = _filter(w, phi, theta)
    if np.any(F <= 0.0) or not np.all(np.isfinite(F)):
        return math.inf, math.inf
    return float(np.sum(np.log(F))), float(np.sum(v * v / F))


def _full_loglik(n: int, sumlogF: float, ssq: float, sigma2: float) -> float:
    return -0.5 * (n * LOG_2PI + n * math.log(sigma2) + sumlogF + ssq / sigma2)


def _concentrated_loglik(n: int, sumlogF: float, ssq: float) -> float:
    return -0.5 * (n * (LOG_2PI + math.log(ssq / n) + 1.0) + sumlogF)


def loglik(s, spec: ArmaSpec, params: ArmaParams) -> float:
    """Exact Gaussian log-likelihood of ``s`` under the given ARMA parameters."""
    x = as_series(s).values
    check_params(spec, params)
    if x.size < spec.p + spec.q + 1:
        raise TooFewObservations(f"{spec.label} needs at least {spec.p + spec.q + 1} points")
    sumlogF, ssq = _loglik_parts(x - params.mean, params.phi, params.theta)
    return _full_loglik(x.size, sumlogF, ssq, params.sigma2)


# -- simulation ----------------------------------------------------------------------


def simulate(spec: ArmaSpec, params: ArmaParams, n: int, seed: int = 0) -> TimeSeries:
    check_params(spec, params)
    if n < 1:
        raise InputError("n must be positive")
    burn = 10 * (spec.p + spec.q + 1)
    rng = np.random.default_rng(seed)
    e = rng.normal(0.0, math.sqrt(params.sigma2), n + burn)
    x = signal.lfilter(np.r_[1.0, -params.theta], np.r_[1.0, -params.phi], e)
    return TimeSeries(x[burn:] + params.mean, name=f"sim-{spec.label}")


# -- estimation ----------------------------------------------------------------------


class _Layout:
    """Unconstrained parameter vector: [ar pacf (p), ma pacf (q), mean (0/1)]."""

    def __init__(self, spec: ArmaSpec):
        self.p, self.q, self.m = spec.p, spec.q, int(spec.include_mean)

    @property
    def size(self) -> int:
        return self.p + self.q + self.m

    def unpack(self, u: np.ndarray):
        phi = _from_unconstrained(u[: self.p])
        theta = _from_unconstrained(u[self.p : self.p + self.q])
        mu = u[self.p + self.q] if self.m else 0.0
        return phi, theta, mu

    def pack(self, phi, theta, mu) -> np.ndarray:
        parts = [_to_unconstrained(np.asarray(phi)), _to_unconstrained(np.asarray(theta))]
        if self.m:
            parts.append(np.array([mu]))
        return np.concatenate(parts)


def _css_start(z: np.ndarray, layout: _Layout) -> np.ndarray:
    """Conditional-sum-of-squares estimate used as the starting point for ML."""
    p = layout.p

    def objective(u):
        phi, theta, mu = layout.unpack(u)
        e = _css_residuals(z - mu, phi, theta)
        return float(np.mean(e[p:] ** 2))

    u0 = np.zeros(layout.size)
    if layout.size == 0:
        return u0
    res = optimize.minimize(objective, u0, method="BFGS", options={"maxiter": 200})
    u = res.x if np.all(np.isfinite(res.x)) else u0
    return np.clip(u, -3.0, 3.0)


def fit(s, spec: ArmaSpec, maxiter: int = 500, ftol: float = 1e-10) -> ArmaFit:
    """Exact maximum-likelihood fit over (phi, theta, mean, sigma2)."""
    x = as_series(s).values
    n = x.size
    need = 5 * (spec.p + spec.q + 1)
    if n < need:
        raise TooFewObservations(f"{spec.label} needs at least {need} observations, got {n}")
    centre = float(x.mean()) if spec.include_mean else 0.0
    scale = float(np.sqrt(np.mean((x - centre) ** 2)))
    if not scale > 0:
        raise ConstantSeries("cannot fit an ARMA model to a constant series")
    z = (x - centre) / scale if spec.include_mean else x / scale

    if spec.p == 0 and spec.q == 0:
        return _fit_white_noise(x, spec)

    layout = _Layout(spec)

    def conc(u):
        phi, theta, mu = layout.unpack(u)
        sumlogF, ssq = _loglik_parts(z - mu, phi, theta)
        if not (np.isfinite(ssq) and ssq > 0):
            return math.inf
        return _concentrated_loglik(n, sumlogF, ssq)

    def objective(u):
        val = conc(u)
        return -val / n if np.isfinite(val) else 1e10

    starts = [_css_start(z, layout), np.zeros(layout.size)]
    best_u, best_val, init_val, converged, message = None, math.inf, None, False, ""
    for u0 in starts:
        f0 = objective(u0)
        if init_val is None:
            init_val = f0
        res = optimize.minimize(
            objective,
            u0,
            method="L-BFGS-B",
            jac="3-point",
            options={"maxiter": maxiter, "ftol": ftol, "gtol": 1e-8},
        )
        u_hat, f_hat = (res.x, res.fun) if res.fun <= f0 else (u0, f0)
        if f_hat < best_val - 1e-12:
            best_u, best_val, converged, message = u_hat, f_hat, bool(res.success), str(res.message)
    if not converged:
        logger.warning("%s fit did not converge: %s", spec.label, message)

    phi, theta, mu_z = layout.unpack(best_u)
    sumlogF, ssq = _loglik_parts(z - mu_z, phi, theta)
    sigma2_z = ssq / n
    loglik_z = _full_loglik(n, sumlogF, ssq, sigma2_z)
    log_jac = n * math.log(scale)

    mean = centre + scale * mu_z if spec.include_mean else 0.0
    sigma2 = sigma2_z * scale**2
    se = _standard_errors(z, spec, phi, theta, mu_z, sigma2_z, scale)
    return ArmaFit(
        spec=spec,
        phi=phi,
        theta=theta,
        mean=float(mean),
        sigma2=float(sigma2),
        loglik=float(loglik_z - log_jac),
        se=se,
        n_obs=n,
        converged=converged,
        init_loglik=float(-init_val * n - log_jac),
        message=message,
    )


def _fit_white_noise(x: np.ndarray, spec: ArmaSpec) -> ArmaFit:
    n = x.size
    mean = float(x.mean()) if spec.include_mean else 0.0
    sigma2 = float(np.mean((x - mean) ** 2))
    ll = _full_loglik(n, 0.0, n * sigma2, sigma2)
    se = {"sigma2": sigma2 * math.sqrt(2.0 / n)}
    if spec.include_mean:
        se["mean"] = math.sqrt(sigma2 / n)
    return ArmaFit(spec, np.zeros(0), np.zeros(0), mean, sigma2, ll, se, n, True, ll, "closed form")


def _standard_errors(z, spec, phi, theta, mu_z, sigma2_z, scale) -> dict:
    """Inverse observed information in natural units (phi, theta, mean, sigma2)."""
    p, q, m = spec.p, spec.q, int(spec.include_mean)
    n = z.size

    def ll(vec):
        ph, th = vec[:p], vec[p : p + q]
        mu = vec[p + q] if m else 0.0
        s2 = vec[-1]
        if s2 <= 0 or _max_inverse_root(ph) >= 1 or _max_inverse_root(th) >= 1:
            return math.nan
        sumlogF, ssq = _loglik_parts(z - mu, ph, th)
        return _full_loglik(n, sumlogF, ssq, s2)

    theta_hat = np.concatenate([phi, theta, [mu_z] if m else [], [sigma2_z]])
    H = _numdiff.hessian(ll, theta_hat, rel=1e-4)
    se_z = _numdiff.standard_errors(-H) if np.all(np.isfinite(H)) else np.full(theta_hat.size, np.nan)
    names = [f"ar{i + 1}" for i in range(p)] + [f"ma{j + 1}" for j in range(q)]
    factors = [1.0] * (p + q)
    if m:
        names.append("mean")
        factors.append(scale)
    names.append("sigma2")
    factors.append(scale**2)
    return {name: float(s * f) for name, s, f in zip(names, se_z, factors)}


# -- prediction ----------------------------------------------------------------------


def psi_weights(phi, theta, h: int) -> np.ndarray:
    """psi_0..psi_{h-1} of the causal MA(infinity) representation."""
    phi = np.asarray(phi, dtype=float)
    ma = additive_ma(theta)
    psi = np.zeros(h)
    psi[0] = 1.0
    for j in range(1, h):
        val = ma[j - 1] if j <= ma.size else 0.0
        for i in range(1, min(j, phi.size) + 1):
            val += phi[i - 1] * psi[j - i]
        psi[j] = val
    return psi


@dataclass(frozen=True)
class Forecast:
    point: np.ndarray
    se: np.ndarray

    def __iter__(self):
        return iter(zip(self.point.tolist(), self.se.tolist()))

    def __len__(self) -> int:
        return self.point.size


def forecast(fit: ArmaFit, s, h: int) -> Forecast:
    """Minimum-MSE h-step forecasts from the end of ``s``."""
    if h < 1:
        raise InputError("horizon must be at least 1")
    x = as_series(s).values
    _, _, a = _filter(x - fit.mean, fit.phi, fit.theta)
    phi_pad, _ = _padded(fit.phi, fit.theta)
    r = phi_pad.size
    points = np.empty(h)
    state = a.copy()
    for k in range(h):
        points[k] = fit.mean + state[0]
        nxt = np.zeros(r)
        nxt[:-1] = state[1:]
        state = phi_pad * state[0] + nxt
    psi = psi_weights(fit.phi, fit.theta, h)
    se = np.sqrt(fit.sigma2 * np.cumsum(psi**2))
    return Forecast(points, se)


def predict_one_step(fit: ArmaFit, full_series, start: int) -> np.ndarray:
    """Rolling one-step-ahead predictions for positions ``start..n-1`` (0-based)."""
    x = as_series(full_series).values
    lo = fit.spec.p + fit.spec.q
    if not lo <= start < x.size:
        raise IndexOutOfRange(f"start must lie in [{lo}, {x.size - 1}], got {start}")
    v, _, _ = _filter(x - fit.mean, fit.phi, fit.theta)
    return (x - v)[start:]


def residuals(fit: ArmaFit, s) -> TimeSeries:
    """One-step innovation residuals x_t - E[x_t | x_1..x_{t-1}]."""
    series = as_series(s)
    v, _, _ = _filter(series.values - fit.mean, fit.phi, fit.theta)
    return TimeSeries(v, series.index, name=f"residuals-{fit.spec.label}")


def fitted_values(fit: ArmaFit, s) -> np.ndarray:
    x = as_series(s).values
    v, _, _ = _filter(x - fit.mean, fit.phi, fit.theta)
    return x - v
