"""Central finite differences shared by the estimators."""

from __future__ import annotations

from typing import Callable

import numpy as np


def _steps(x: np.ndarray, rel: float) -> np.ndarray:
    return rel * np.maximum(np.abs(x), 1.0)


def gradient(f: Callable[[np.ndarray], float], x, rel: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    h = _steps(x, rel)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h[i])
    return g


def hessian(f: Callable[[np.ndarray], float], x, rel: float = 1e-4) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    k = x.size
    h = _steps(x, rel)
    f0 = f(x)
    H = np.empty((k, k))
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return H


def standard_errors(neg_hessian: np.ndarray) -> np.ndarray:
    """Square roots of the diagonal of the inverse observed information; NaN where undefined."""
    k = neg_hessian.shape[0]
    if k == 0:
        return np.zeros(0)
    try:
        cov = np.linalg.inv(neg_hessian)
    except np.linalg.LinAlgError:
        return np.full(k, np.nan)
    d = np.diag(cov)
    with np.errstate(invalid="ignore"):
        return np.where(d > 0, np.sqrt(np.abs(d)), np.nan)
