"""Panel Gauss-Legendre rules and numerically safe thermal factors."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

COTH_SATURATION = 50.0
COTH_SERIES = 1e-6


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(breaks, order: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite Gauss rule over consecutive ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(order)
    a, b = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def integrate_panels(f, breaks, order: int = 20, chunk: int = 200_000) -> float:
    """Integrate a vectorized ``f`` with a composite Gauss rule.

    Panels are summed in a fixed order so the result does not depend on how
    the work is chunked.
    """
    breaks = np.asarray(breaks, dtype=float)
    per = max(1, chunk // order)
    partial = []
    for start in range(0, len(breaks) - 1, per):
        k, w = panel_nodes(breaks[start : start + per + 1], order)
        partial.append(np.dot(w, f(k)))
    return float(np.sum(partial))


def coth_half(beta: float, omega) -> np.ndarray:
    """``coth(beta * omega / 2)``; exactly 1 for ``beta * omega > 50`` and the
    series ``2 / (beta omega) + beta omega / 6`` below ``beta * omega = 1e-6``.

    ``beta = inf`` is the vacuum (factor 1).
    """
    omega = np.asarray(omega, dtype=float)
    if np.isinf(beta):
        return np.ones_like(omega)
    y = beta * omega
    out = np.ones_like(y)
    mid = (y >= COTH_SERIES) & (y <= COTH_SATURATION)
    out[mid] = 1.0 / np.tanh(0.5 * y[mid])
    small = y < COTH_SERIES
    with np.errstate(divide="ignore"):
        out[small] = 2.0 / y[small] + y[small] / 6.0
    return out


def bose_occupation(beta: float, omega) -> np.ndarray:
    """``1 / (exp(beta omega) - 1)``; zero for the vacuum."""
    omega = np.asarray(omega, dtype=float)
    if np.isinf(beta):
        return np.zeros_like(omega)
    return 0.5 * (coth_half(beta, omega) - 1.0)


def geometric_breaks(lo: float, hi: float, ratio: float = 2.0) -> np.ndarray:
    """Breakpoints from ``lo`` to ``hi`` growing by ``ratio``; includes both ends."""
    if hi <= lo:
        return np.array([lo, hi])
    n = int(np.ceil(np.log(hi / lo) / np.log(ratio)))
    return np.geomspace(lo, hi, max(n, 1) + 1)
