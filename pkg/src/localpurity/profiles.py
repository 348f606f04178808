"""Compactly supported mode profiles ``(v, w)`` and their Fourier amplitudes.

Conventions: hbar = c = 1, the support is ``|x| <= ell``, and Fourier
transforms are unitary, ``f~(k) = (2 pi)^(-n/2) int f(x) exp(-i k.x) d^n x``.
All families are even (spherically symmetric in 3D) so the transforms are
real and depend on ``|k|`` only.

Families
--------
``bspline``     v = w = A B_m(x / ell)                              (1D, m >= 1)
``d2bspline``   v = w = -A d^2/dx^2 B_{m-1}(x / ell)                (1D, m >= 4)
``ball3d``      v = w = A Pi3^{*m}(m x / ell)                       (3D, m >= 2)
``zkappa``      v = sqrt(w_k) z, w = z / sqrt(w_k),
                z = -A d^2/dx^2 [cos(kappa x) B_m(x / ell)]         (1D, m >= 3)

``A`` is fixed by the commutation constraint ``int v w = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from math import comb, gamma, pi, sqrt

import numpy as np
from scipy.interpolate import CubicSpline

from .bspline import bspline, bspline_knots, sinc_power
from .errors import DomainError, ValidationError
from .quadrature import gauss_legendre, panel_nodes

FAMILIES = ("bspline", "d2bspline", "ball3d", "zkappa")
_MIN_ORDER = {"bspline": 1, "d2bspline": 4, "ball3d": 2, "zkappa": 3}
_DIM = {"bspline": 1, "d2bspline": 1, "ball3d": 3, "zkappa": 1}

# the nine reference profiles, numbered 1..9
NUMBERED_PROFILES = {
    1: ("bspline", 1),
    2: ("bspline", 2),
    3: ("bspline", 3),
    4: ("d2bspline", 4),
    5: ("d2bspline", 5),
    6: ("d2bspline", 6),
    7: ("ball3d", 2),
    8: ("ball3d", 3),
    9: ("ball3d", 4),
}


def ball_transform(r) -> np.ndarray:
    """``b(r) = 3 (sin r - r cos r) / r^3``, the unit-ball transform scaled to ``b(0) = 1``."""
    r = np.abs(np.asarray(r, dtype=float))
    out = np.empty_like(r)
    small = r < 1e-2
    rs = r[small] ** 2
    out[small] = 1.0 - rs / 10.0 + rs**2 / 280.0 - rs**3 / 15120.0
    rb = r[~small]
    out[~small] = 3.0 * (np.sin(rb) - rb * np.cos(rb)) / rb**3
    return out


def sphere_area(dim: int) -> float:
    """Area of the unit sphere in ``dim`` dimensions (2 for dim = 1)."""
    return 2.0 * pi ** (dim / 2) / gamma(dim / 2)


@lru_cache(maxsize=None)
def _ball_convolution_table(m: int, points_per_unit: int = 4000):
    """Radial table of ``Pi3^{*m}(r)`` on ``[0, m]`` by repeated radial convolution.

    For radial ``g``: ``(Pi3 * g)(r) = (2 pi / r) int_0^1 s [G(r+s) - G(|r-s|)] ds``
    with ``G(t) = int_0^t t' g(t') dt'``.
    """
    r = np.linspace(0.0, 2.0, 2 * points_per_unit + 1)
    vals = np.pi / 12.0 * (4.0 + r) * (2.0 - r) ** 2  # two-ball overlap volume
    xg, wg = gauss_legendre(24)
    for j in range(3, m + 1):
        spline = CubicSpline(r, r * vals, bc_type="natural")
        G = spline.antiderivative()
        support = r[-1]

        def Gc(t):
            return G(np.clip(t, 0.0, support))

        r_new = np.linspace(0.0, float(j), j * points_per_unit + 1)
        out = np.empty_like(r_new)
        out[0] = 4.0 * np.pi * np.sum(
            0.5 * wg * (0.5 * (xg + 1)) ** 2 * CubicSpline(r, vals)(0.5 * (xg + 1))
        )
        for idx in range(1, len(r_new)):
            rr = r_new[idx]
            # split the s-integral at the kink s = rr
            cuts = np.unique(np.clip([0.0, rr, 1.0], 0.0, 1.0))
            total = 0.0
            for a, b in zip(cuts[:-1], cuts[1:]):
                if b <= a:
                    continue
                s = 0.5 * (a + b) + 0.5 * (b - a) * xg
                total += 0.5 * (b - a) * np.dot(wg, s * (Gc(rr + s) - Gc(np.abs(rr - s))))
            out[idx] = 2.0 * np.pi * total / rr
        r, vals = r_new, np.maximum(out, 0.0)
    return CubicSpline(r, vals), float(r[-1])


@dataclass(frozen=True)
class ModeProfile:
    """A localized mode shape with position- and Fourier-space evaluators.

    Constructed unnormalized through :func:`make_profile` which returns the
    normalized version.
    """

    family: str
    m: int
    ell: float = 1.0
    kappa: float | None = None
    mass: float = 0.0
    amplitude: float = 1.0
    dim: int = field(init=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown profile family {self.family!r}; expected one of {FAMILIES}")
        if int(self.m) != self.m or self.m < _MIN_ORDER[self.family]:
            raise ValidationError(
                f"{self.family} requires integer m >= {_MIN_ORDER[self.family]}, got {self.m}"
            )
        if not self.ell > 0:
            raise ValidationError(f"ell must be positive, got {self.ell}")
        if self.family == "zkappa":
            if self.kappa is None or not self.kappa > 0:
                raise ValidationError("zkappa profiles need kappa > 0")
        elif self.kappa is not None:
            raise ValidationError(f"kappa only applies to zkappa profiles, got {self.kappa}")
        if self.mass < 0:
            raise ValidationError("mass must be non-negative")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "dim", _DIM[self.family])

    # ----- metadata used by the quadratures -------------------------------
    @property
    def label(self) -> str:
        if self.family == "zkappa":
            return f"zkappa(m={self.m}, kappa={self.kappa:g}, ell={self.ell:g})"
        return f"{self.family}(m={self.m}, ell={self.ell:g})"

    @property
    def omega_kappa(self) -> float:
        return sqrt(self.kappa**2 + self.mass**2) if self.family == "zkappa" else 1.0

    @property
    def ir_power(self) -> int:
        """Power ``q`` with ``|v~(k)|^2 ~ k^q`` as ``k -> 0``."""
        return 4 if self.family in ("d2bspline", "zkappa") else 0

    @property
    def uv_power(self) -> int:
        """Power ``p`` with ``|v~(k)|^2 <= c k^-p`` for large ``k``."""
        return {
            "bspline": 2 * self.m,
            "d2bspline": 2 * self.m - 6,
            "ball3d": 4 * self.m,
            "zkappa": 2 * self.m - 4,
        }[self.family]

    @property
    def oscillation_scale(self) -> float:
        """Wavenumber spacing of the zeros of the spectrum."""
        if self.family == "ball3d":
            return pi * self.m / self.ell
        return pi / self.ell

    @property
    def peak_wavenumber(self) -> float:
        return self.kappa if self.family == "zkappa" else 0.0

    # ----- position space -------------------------------------------------
    def _shape(self, x) -> np.ndarray:
        """Unnormalized ``z`` (or ``v = w``) in position space."""
        x = np.asarray(x, dtype=float)
        s = x / self.ell
        m, ell = self.m, self.ell
        if self.family == "bspline":
            return bspline(m, s)
        if self.family == "d2bspline":
            return -bspline(m - 1, s, deriv=2) / ell**2
        if self.family == "zkappa":
            k = self.kappa
            c, sn = np.cos(k * x), np.sin(k * x)
            b0 = bspline(m, s)
            b1 = bspline(m, s, deriv=1) / ell
            b2 = bspline(m, s, deriv=2) / ell**2
            return -(-k**2 * c * b0 - 2.0 * k * sn * b1 + c * b2)
        table, support = _ball_convolution_table(m)
        r = np.abs(x) * m / ell
        return np.where(r < support, table(np.minimum(r, support)), 0.0)

    def _radius(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dim == 3 and x.ndim >= 1 and x.shape[-1] == 3:
            return np.linalg.norm(x, axis=-1)
        return x

    def v(self, x) -> np.ndarray:
        """``v`` at positions ``x`` (1D coordinate, 3D radius, or ``(..., 3)`` points)."""
        scale = sqrt(self.omega_kappa) if self.family == "zkappa" else 1.0
        return self.amplitude * scale * self._shape(self._radius(x))

    def w(self, x) -> np.ndarray:
        scale = 1.0 / sqrt(self.omega_kappa) if self.family == "zkappa" else 1.0
        return self.amplitude * scale * self._shape(self._radius(x))

    def breakpoints(self) -> np.ndarray:
        """Points in ``[0, ell]`` between which the profile is smooth."""
        if self.family == "ball3d":
            knots = np.arange(0, self.m + 1) / self.m
            return self.ell * knots
        m = self.m - 1 if self.family == "d2bspline" else self.m
        knots = bspline_knots(m)
        return self.ell * np.unique(np.concatenate([[0.0], knots[knots >= 0]]))

    # ----- Fourier space --------------------------------------------------
    def _shape_fourier(self, k) -> np.ndarray:
        k = np.abs(np.asarray(k, dtype=float))
        m, ell = self.m, self.ell
        if self.family == "bspline":
            return ell * 2.0**m / (m * sqrt(2 * pi)) * sinc_power(m, k * ell)
        if self.family == "d2bspline":
            return k**2 * ell * 2.0 ** (m - 1) / ((m - 1) * sqrt(2 * pi)) * sinc_power(m - 1, k * ell)
        if self.family == "zkappa":
            pref = ell * 2.0**m / (2.0 * m * sqrt(2 * pi))
            kap = self.kappa
            return pref * k**2 * (sinc_power(m, (k - kap) * ell) + sinc_power(m, (k + kap) * ell))
        pref = (ell / m) ** 3 / (2 * pi) ** 1.5
        return pref * (4.0 * pi / 3.0 * ball_transform(k * ell / m)) ** m

    def fourier_amplitude(self, k) -> tuple[np.ndarray, np.ndarray]:
        """Radial unitary Fourier amplitudes ``(v~(k), w~(k))`` for ``k >= 0``."""
        k = np.asarray(k, dtype=float)
        if np.any(k < 0):
            raise ValidationError("radial wavenumbers must be non-negative")
        base = self.amplitude * self._shape_fourier(k)
        if self.family == "zkappa":
            root = sqrt(self.omega_kappa)
            return root * base, base / root
        return base, base

    def power_envelope(self) -> tuple[float, float, float]:
        """``(coef, p, k0)`` with ``|v~(k)| |w~(k)| <= coef * k^-p`` for ``k >= k0``.

        For ``zkappa`` the bound is on ``|z~|^2``; the caller supplies the
        ``omega_kappa`` factors.
        """
        coef, p, k0 = self._envelope()
        return coef, p, k0

    def tail_mean_factor(self) -> float:
        """Asymptotic ratio of ``|v~ w~|`` to its envelope, averaged over oscillations.

        Zero when the envelope is only a bound; then no tail estimate is added.
        """
        if self.family == "bspline":
            n = self.m
        elif self.family == "d2bspline":
            n = self.m - 1
        else:
            return 0.0
        # mean of sin^(2n)
        return comb(2 * n, n) / 4.0**n

    def _envelope(self) -> tuple[float, float, float]:
        m, ell, A2 = self.m, self.ell, self.amplitude**2
        if self.family == "bspline":
            pref = ell * 2.0**m / (m * sqrt(2 * pi))
            return A2 * pref**2 * (m / ell) ** (2 * m), 2 * m, 0.0
        if self.family == "d2bspline":
            n = m - 1
            pref = ell * 2.0**n / (n * sqrt(2 * pi))
            return A2 * pref**2 * (n / ell) ** (2 * n), 2 * n - 4, 0.0
        if self.family == "zkappa":
            pref = ell * 2.0**m / (2.0 * m * sqrt(2 * pi))
            # (k - kappa) >= k / 2 beyond k0 = 2 kappa
            amp = pref * 2.0 * (2.0 * m / ell) ** m
            return A2 * amp**2, 2 * m - 4, 2.0 * self.kappa
        pref = (ell / m) ** 3 / (2 * pi) ** 1.5 * (4.0 * pi / 3.0) ** m
        # |b(r)| <= 6 / r^2 for r >= 1
        amp = pref * (6.0 * m**2 / ell**2) ** m
        return A2 * amp**2, 4 * m, m / ell

    # ----- integrals --------------------------------------------------------
    def _position_nodes(self, order: int = 24) -> tuple[np.ndarray, np.ndarray]:
        """Composite Gauss rule on ``[0, ell]`` respecting knots (and kappa oscillations)."""
        breaks = self.breakpoints()
        if self.family == "zkappa":
            width = min(pi / (2.0 * self.kappa), self.ell / 8)
            refined = [breaks[0]]
            for a, b in zip(breaks[:-1], breaks[1:]):
                n = max(1, int(np.ceil((b - a) / width)))
                refined.extend(np.linspace(a, b, n + 1)[1:])
            breaks = np.asarray(refined)
        elif self.family == "ball3d":
            # radial table is a spline, refine to its resolution scale
            breaks = np.linspace(0.0, self.ell, 64 * self.m + 1)
        return panel_nodes(breaks, order)

    def commutator_integral(self, method: str = "auto") -> float:
        """``int d^n x v(x) w(x)``.

        ``method`` is ``"position"``, ``"fourier"``, or ``"auto"`` (Fourier for 3D).
        """
        if method == "auto":
            method = "fourier" if self.dim == 3 else "position"
        if method == "position":
            r, wts = self._position_nodes()
            integrand = self.v(r) * self.w(r)
            if self.dim == 1:
                return float(2.0 * np.dot(wts, integrand))
            return float(4.0 * pi * np.dot(wts, r**2 * integrand))
        if method == "fourier":
            return fourier_overlap(self)
        raise ValidationError(f"unknown method {method!r}")

    def with_amplitude(self, amplitude: float) -> "ModeProfile":
        return replace(self, amplitude=amplitude)

    def scaled(self, factor: float) -> "ModeProfile":
        return replace(self, amplitude=self.amplitude * factor)


def fourier_overlap(profile: ModeProfile, order: int = 24) -> float:
    """``int d^n k v~(k) w~(k)`` by a panel rule plus an analytic power-law tail."""
    scale = profile.oscillation_scale
    k_peak = profile.peak_wavenumber
    coef, p, k0 = profile.power_envelope()
    dim = profile.dim
    area = sphere_area(dim)
    # integrate well past the envelope crossover, then bound the rest
    k_hi = max(k0, k_peak) + 400.0 * scale * max(1, profile.m)
    breaks = np.arange(0.0, k_hi + scale, scale / 2.0)
    k, w = panel_nodes(breaks, order)
    vt, wt = profile.fourier_amplitude(k)
    body = area * np.dot(w, k ** (dim - 1) * vt * wt)
    q = dim - 1 - p
    if q >= -1:
        raise DomainError(f"Fourier norm of {profile.label} does not converge")
    tail = area * coef * breaks[-1] ** (q + 1) / (-(q + 1))
    return float(body + profile.tail_mean_factor() * tail)


def normalize(profile: ModeProfile) -> ModeProfile:
    """Rescale so that ``int v w = 1``."""
    value = profile.commutator_integral()
    if not value > 0 or not np.isfinite(value):
        raise DomainError(f"profile {profile.label} has zero or invalid norm ({value})")
    return profile.scaled(1.0 / sqrt(value))


def make_profile(family: str, m: int, ell: float = 1.0, kappa: float | None = None,
                 mass: float = 0.0) -> ModeProfile:
    """Build a normalized profile."""
    return normalize(ModeProfile(family, m, ell, kappa=kappa, mass=mass))


def numbered_profile(number: int, ell: float = 1.0) -> ModeProfile:
    """Normalized reference profile ``1..9``: B-splines 1-3, D2 B-splines 4-6, balls 2-4."""
    try:
        family, m = NUMBERED_PROFILES[number]
    except KeyError:
        raise ValidationError(f"profile number must be 1..9, got {number}") from None
    return make_profile(family, m, ell)


def profile_from_mapping(d: dict) -> ModeProfile:
    """Profile from a key-value description ``{family, m, ell, kappa?, mass?}``."""
    allowed = {"family", "m", "ell", "kappa", "mass", "dim"}
    unknown = set(d) - allowed
    if unknown:
        raise ValidationError(f"unknown profile keys: {sorted(unknown)}")
    if "family" not in d or "m" not in d:
        raise ValidationError("profile needs 'family' and 'm'")
    family = str(d["family"]).lower()
    if family in ("bspline", "d2bspline", "zkappa") and d.get("dim", 1) != 1:
        raise ValidationError(f"{family} profiles are one dimensional")
    if family == "ball3d" and d.get("dim", 3) != 3:
        raise ValidationError("ball3d profiles are three dimensional")
    kappa = d.get("kappa")
    return make_profile(
        family,
        int(d["m"]),
        float(d.get("ell", 1.0)),
        kappa=None if kappa is None else float(kappa),
        mass=float(d.get("mass", 0.0)),
    )


def profile_to_mapping(profile: ModeProfile) -> dict:
    out = {"family": profile.family, "m": profile.m, "ell": profile.ell, "dim": profile.dim}
    if profile.family == "zkappa":
        out["kappa"] = profile.kappa
        out["mass"] = profile.mass
    return out


def bspline_square_integral(m: int) -> float:
    """Exact ``int B_m(s)^2 ds`` from the cardinal autocorrelation ``N_{2m}(m)``."""
    # N_{2m}(m) = 1/(2m-1)! sum_j (-1)^j C(2m, j) (m - j)_+^{2m-1}
    n = 2 * m
    fact = 1.0
    for i in range(2, n):
        fact *= i
    val = sum((-1) ** j * comb(n, j) * max(m - j, 0) ** (n - 1) for j in range(n + 1)) / fact
    return 4.0 ** (m - 1) * 2.0 / m * val
