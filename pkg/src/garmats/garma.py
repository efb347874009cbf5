"""Poisson GARMA(p, q) with log link.

Linear predictor for t >= m = max(p, q)::

    eta_t = x_t'b + sum_j phi_j (log y*_{t-j} - x_{t-j}'b)
                  + sum_j theta_j (log y*_{t-j} - eta_{t-j})

with ``y* = max(y, c)`` so zero counts have a finite log. The first ``m``
observations only condition the recursion; for them ``eta_t = log y*_t``
(zero MA residual) and they do not enter the likelihood.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import optimize
from scipy.special import gammaln

from . import _numdiff
from .errors import InputError, NonCountData, OverflowGuard, TooFewObservations
from .series import TimeSeries, as_series

logger = logging.getLogger(__name__)

ETA_LIMIT = 700.0


@dataclass(frozen=True)
class GarmaSpec:
    p: int = 1
    q: int = 0
    clamp_c: float = 0.1
    link: str = "log"
    family: str = "poisson"

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise InputError("orders must be non-negative")
        if not 0.0 < self.clamp_c < 1.0:
            raise InputError("clamp_c must lie in (0, 1)")
        if self.link != "log" or self.family != "poisson":
            raise InputError("only the Poisson family with log link is supported")

    @property
    def m(self) -> int:
        return max(self.p, self.q)

    @property
    def label(self) -> str:
        return f"GARMA({self.p},{self.q})"


@dataclass(frozen=True)
class GarmaParams:
    beta: np.ndarray
    phi: np.ndarray = field(default_factory=lambda: np.zeros(0))
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        for name in ("beta", "phi", "theta"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))

    def vector(self) -> np.ndarray:
        return np.concatenate([self.beta, self.phi, self.theta])


@dataclass(frozen=True)
class GarmaFit:
    spec: GarmaSpec
    beta: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    se: dict
    mu: np.ndarray
    loglik: float
    converged: bool
    n_obs: int
    init_loglik: float = float("nan")
    message: str = ""

    @property
    def params(self) -> GarmaParams:
        return GarmaParams(self.beta, self.phi, self.theta)

    @property
    def n_coef(self) -> int:
        return self.beta.size + self.phi.size + self.theta.size

    def coefficients(self) -> dict[str, float]:
        names = _param_names(self.beta.size, self.spec.p, self.spec.q)
        return dict(zip(names, self.params.vector().tolist()))

    def coefficient_table(self) -> list[dict]:
        out = []
        for name, value in self.coefficients().items():
            se = self.se.get(name)
            out.append(
                {"term": name, "estimate": value, "std_error": None if se is None or not np.isfinite(se) else se}
            )
        return out


def _param_names(k: int, p: int, q: int) -> list[str]:
    beta = ["intercept"] if k == 1 else ["intercept"] + [f"beta{i}" for i in range(1, k)]
    return beta + [f"ar{j + 1}" for j in range(p)] + [f"ma{j + 1}" for j in range(q)]


def _design(n: int, x) -> np.ndarray:
    if x is None:
        return np.ones((n, 1))
    X = np.asarray(x, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != n:
        raise InputError(f"covariate matrix has {X.shape[0]} rows for {n} observations")
    return X


def _check_counts(y: np.ndarray) -> None:
    if np.any(y < 0) or np.any(y != np.round(y)):
        raise NonCountData("GARMA requires non-negative integer observations")


def _check_param_sizes(spec: GarmaSpec, params: GarmaParams, k: int) -> None:
    if params.beta.size != k or params.phi.size != spec.p or params.theta.size != spec.q:
        raise InputError(
            f"{spec.label} with {k} regressors needs beta[{k}], phi[{spec.p}], theta[{spec.q}]"
        )


def garma_mean_recursion(
    spec: GarmaSpec,
    params: GarmaParams,
    y_history,
    mu_history,
    x_row=None,
    x_history=None,
) -> float:
    """Conditional mean at one time point.

    ``y_history`` and ``mu_history`` are the most recent observations and
    conditional means, oldest first (at least ``p`` and ``q`` of them
    respectively). ``x_history`` holds the covariate rows matching
    ``y_history``; both covariate arguments default to an intercept.
    """
    y_hist = np.asarray(y_history, dtype=float)
    mu_hist = np.asarray(mu_history, dtype=float)
    if y_hist.size < max(spec.p, spec.q) or mu_hist.size < spec.q:
        raise InputError("history shorter than the model order")
    x_row = np.ones(1) if x_row is None else np.atleast_1d(np.asarray(x_row, dtype=float))
    if x_history is None:
        x_hist = np.ones((y_hist.size, x_row.size))
    else:
        x_hist = np.atleast_2d(np.asarray(x_history, dtype=float))
    beta = params.beta
    eta = float(x_row @ beta)
    for j in range(1, spec.p + 1):
        eta += params.phi[j - 1] * (math.log(max(y_hist[-j], spec.clamp_c)) - float(x_hist[-j] @ beta))
    for j in range(1, spec.q + 1):
        eta += params.theta[j - 1] * (math.log(max(y_hist[-j], spec.clamp_c)) - math.log(mu_hist[-j]))
    if not eta <= ETA_LIMIT:
        raise OverflowGuard(f"linear predictor {eta:.4g} exceeds {ETA_LIMIT}")
    return math.exp(eta)


@njit(cache=True)
def _eta_path(log_ystar, xb, phi, theta, m, limit):
    """Linear predictor path; returns (eta, index of first overflow or -1)."""
    n = log_ystar.shape[0]
    eta = np.empty(n)
    for t in range(m):
        eta[t] = log_ystar[t]
    for t in range(m, n):
        val = xb[t]
        for j in range(phi.shape[0]):
            val += phi[j] * (log_ystar[t - j - 1] - xb[t - j - 1])
        for j in range(theta.shape[0]):
            val += theta[j] * (log_ystar[t - j - 1] - eta[t - j - 1])
        if not val <= limit:
            return eta, t
        eta[t] = val
    return eta, -1


def _eta(y: np.ndarray, X: np.ndarray, spec: GarmaSpec, params: GarmaParams) -> np.ndarray:
    log_ystar = np.log(np.maximum(y, spec.clamp_c))
    eta, bad = _eta_path(log_ystar, X @ params.beta, params.phi, params.theta, spec.m, ETA_LIMIT)
    if bad >= 0:
        raise OverflowGuard(f"linear predictor exceeds {ETA_LIMIT} at t={bad}")
    return eta


def conditional_means(s, spec: GarmaSpec, params: GarmaParams, x=None) -> np.ndarray:
    y = as_series(s).values
    X = _design(y.size, x)
    _check_param_sizes(spec, params, X.shape[1])
    return np.exp(_eta(y, X, spec, params))


@njit(cache=True)
def _eta_path_const(log_ystar, const, phi, theta, m, limit):
    """Intercept-only path written with const = b0 (1 - sum phi)."""
    n = log_ystar.shape[0]
    eta = np.empty(n)
    for t in range(m):
        eta[t] = log_ystar[t]
    for t in range(m, n):
        val = const
        for j in range(phi.shape[0]):
            val += phi[j] * log_ystar[t - j - 1]
        for j in range(theta.shape[0]):
            val += theta[j] * (log_ystar[t - j - 1] - eta[t - j - 1])
        if not val <= limit:
            return eta, t
        eta[t] = val
    return eta, -1


def _poisson_loglik(y: np.ndarray, eta: np.ndarray, lgam: np.ndarray) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        val = float(np.sum(y * eta - np.exp(eta) - lgam))
    return val if np.isfinite(val) else -math.inf


def garma_loglik(s, spec: GarmaSpec, params: GarmaParams, x=None) -> float:
    """Conditional Poisson log-likelihood over t >= max(p, q)."""
    y = as_series(s).values
    _check_counts(y)
    if y.size <= spec.m:
        raise TooFewObservations(f"{spec.label} needs more than {spec.m} observations")
    X = _design(y.size, x)
    _check_param_sizes(spec, params, X.shape[1])
    eta = _eta(y, X, spec, params)
    m = spec.m
    return _poisson_loglik(y[m:], eta[m:], gammaln(y[m:] + 1.0))


def garma_fit(s, spec: GarmaSpec, x=None, maxiter: int = 500) -> GarmaFit:
    """Maximum conditional likelihood by BFGS with finite-difference gradients."""
    y = as_series(s).values
    _check_counts(y)
    need = 10 * (spec.p + spec.q + 1)
    if y.size < need:
        raise TooFewObservations(f"{spec.label} needs at least {need} observations, got {y.size}")
    X = _design(y.size, x)
    k, p, q, m = X.shape[1], spec.p, spec.q, spec.m
    log_ystar = np.log(np.maximum(y, spec.clamp_c))
    y_eff = y[m:]
    lgam = gammaln(y_eff + 1.0)
    n_eff = y_eff.size

    def ll(vec):
        beta, phi, theta = vec[:k], vec[k : k + p], vec[k + p :]
        eta, bad = _eta_path(log_ystar, X @ beta, phi, theta, m, ETA_LIMIT)
        if bad >= 0:
            return -math.inf
        return _poisson_loglik(y_eff, eta[m:], lgam)

    # With an intercept only, search over a = b0 (1 - sum phi) + centre * sum phi
    # instead of b0: near sum(phi) = 1 the intercept is barely identified, and
    # centring the lagged logs decouples the level from the AR coefficients.
    intercept_only = k == 1 and np.all(X == 1.0)
    centre = float(np.mean(log_ystar))

    def const_of(w):
        return w[0] - centre * float(np.sum(w[1 : 1 + p]))

    def ll_search(w):
        if not intercept_only:
            return ll(w)
        eta, bad = _eta_path_const(log_ystar, const_of(w), w[1 : 1 + p], w[1 + p :], m, ETA_LIMIT)
        if bad >= 0:
            return -math.inf
        return _poisson_loglik(y_eff, eta[m:], lgam)

    def objective(w):
        val = ll_search(w)
        return -val / n_eff if np.isfinite(val) else 1e10

    w0 = np.zeros(k + p + q)
    w0[0] = math.log(max(float(np.mean(np.maximum(y, spec.clamp_c))), spec.clamp_c))
    f0 = objective(w0)
    res = optimize.minimize(
        objective, w0, method="BFGS", jac="3-point", options={"maxiter": maxiter, "gtol": 1e-7}
    )
    w, f_hat = (res.x, res.fun) if res.fun <= f0 else (w0, f0)
    converged = bool(res.success)
    if not converged and _small_gradient(objective, w):
        # BFGS line search stalls on precision loss at an optimum; the gradient decides.
        converged = True
    if not converged:
        logger.warning("%s fit did not converge: %s", spec.label, res.message)

    vec = w.copy()
    if intercept_only:
        denom = 1.0 - float(np.sum(w[1 : 1 + p]))
        const = const_of(w)
        vec[0] = const / denom if denom != 0.0 else math.copysign(math.inf, const)

    if np.all(np.isfinite(vec)):
        H = _numdiff.hessian(ll, vec, rel=1e-5)
    else:
        H = np.full((vec.size, vec.size), np.nan)
    se_vec = _numdiff.standard_errors(-H) if np.all(np.isfinite(H)) else np.full(vec.size, np.nan)
    names = _param_names(k, p, q)
    params = GarmaParams(vec[:k], vec[k : k + p], vec[k + p :])
    if intercept_only:
        eta, _ = _eta_path_const(log_ystar, const_of(w), params.phi, params.theta, m, ETA_LIMIT)
    else:
        eta = _eta(y, X, spec, params)
    return GarmaFit(
        spec=spec,
        beta=params.beta,
        phi=params.phi,
        theta=params.theta,
        se=dict(zip(names, se_vec.tolist())),
        mu=np.exp(eta),
        loglik=float(-f_hat * n_eff),
        converged=converged,
        n_obs=int(y.size),
        init_loglik=float(-f0 * n_eff),
        message=str(res.message),
    )


def _small_gradient(objective, vec, tol: float = 1e-4) -> bool:
    g = _numdiff.gradient(objective, vec)
    return bool(np.all(np.isfinite(g)) and np.max(np.abs(g)) < tol)


def garma_simulate(spec: GarmaSpec, params: GarmaParams, n: int, seed: int = 0) -> TimeSeries:
    """Intercept-only simulation: y_t ~ Poisson(mu_t), mu_t from the recursion."""
    if n < 1:
        raise InputError("n must be positive")
    _check_param_sizes(spec, params, 1)
    rng = np.random.default_rng(seed)
    burn = 10 * (spec.p + spec.q + 1)
    total = n + burn
    b0 = float(params.beta[0])
    m = spec.m
    y = np.empty(total)
    eta = np.empty(total)
    c = spec.clamp_c
    for t in range(total):
        if t < m:
            val = b0
        else:
            val = b0
            for j in range(1, spec.p + 1):
                val += params.phi[j - 1] * (math.log(max(y[t - j], c)) - b0)
            for j in range(1, spec.q + 1):
                val += params.theta[j - 1] * (math.log(max(y[t - j], c)) - eta[t - j])
        # numpy cannot draw Poisson variates with rate above ~1e18 (log ~ 41.4)
        if not val <= min(ETA_LIMIT, 41.0):
            raise OverflowGuard(f"linear predictor {val:.4g} diverged at step {t}")
        eta[t] = val
        y[t] = rng.poisson(math.exp(val))
    return TimeSeries(y[burn:], name=f"sim-{spec.label}")
