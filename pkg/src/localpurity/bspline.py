"""Cardinal B-splines and the symmetric rectangle-convolution splines ``B_m``.

``N_n`` is the cardinal B-spline of order ``n`` on ``[0, n]`` (piecewise
polynomial of degree ``n - 1``, unit integral). The rectangle ``Pi`` has unit
height on ``[-1, 1]``, so ``Pi^{*m}(y) = 2^{m-1} N_m((y + m) / 2)`` and

    B_m(s) = Pi^{*m}(m s) = 2^{m-1} N_m(m (s + 1) / 2),

supported on ``[-1, 1]``.
"""
from __future__ import annotations

from math import comb

import numpy as np

from .errors import ValidationError


def cardinal_bspline(n: int, y, deriv: int = 0) -> np.ndarray:
    """Evaluate ``N_n`` (or its ``deriv``-th derivative) by the Cox-de Boor recursion.

    Derivatives use ``N_n^{(d)}(y) = sum_a (-1)^a C(d, a) N_{n-d}(y - a)``,
    valid away from knots when ``n - d >= 1``.
    """
    if n < 1:
        raise ValidationError(f"B-spline order must be >= 1, got {n}")
    if deriv < 0 or deriv > n - 1:
        raise ValidationError(f"derivative order {deriv} not available for order {n}")
    y = np.asarray(y, dtype=float)
    if deriv:
        out = np.zeros_like(y)
        for a in range(deriv + 1):
            out += (-1) ** a * comb(deriv, a) * cardinal_bspline(n - deriv, y - a)
        return out
    # order-1 values on shifted arguments, then raise the order in place
    shifts = np.arange(n)
    vals = [((y - j >= 0.0) & (y - j < 1.0)).astype(float) for j in shifts]
    for order in range(2, n + 1):
        vals = [
            ((y - j) * vals[j] + (order - (y - j)) * vals[j + 1]) / (order - 1)
            for j in range(n - order + 1)
        ]
    return vals[0]


def bspline(m: int, s, deriv: int = 0) -> np.ndarray:
    """``B_m(s)`` or its ``deriv``-th derivative with respect to ``s``."""
    if m < 1:
        raise ValidationError(f"B_m requires m >= 1, got {m}")
    s = np.asarray(s, dtype=float)
    y = 0.5 * m * (s + 1.0)
    # close the support on the right so that B_1(1) = 1 like B_1(-1)
    y = np.where(s == 1.0, np.nextafter(float(m), 0.0), y)
    out = 2.0 ** (m - 1) * (0.5 * m) ** deriv * cardinal_bspline(m, y, deriv)
    return np.where(np.abs(s) > 1.0, 0.0, out)


def bspline_knots(m: int) -> np.ndarray:
    """Breakpoints of ``B_m`` in ``s``; ``m + 1`` equally spaced points in ``[-1, 1]``."""
    return np.linspace(-1.0, 1.0, m + 1)


def sinc_power(m: int, r) -> np.ndarray:
    """``S_m(r) = [sin(r/m) / (r/m)]^m``; proportional to the transform of ``B_m``."""
    r = np.asarray(r, dtype=float)
    return np.sinc(r / (m * np.pi)) ** m
