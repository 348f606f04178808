"""Thermal second moments, symplectic eigenvalue and purity of local modes.

The returned moments are covariance-matrix entries (``<{V, V}>``), so the
vacuum of a perfectly peaked mode gives ``nu = 1``:

    Sigma_VV = |S^{n-1}| int_0^inf dk k^{n-1} coth(beta w_k / 2) |v~(k)|^2 / w_k
    Sigma_WW = |S^{n-1}| int_0^inf dk k^{n-1} coth(beta w_k / 2) |w~(k)|^2 w_k

with unitary transforms and ``w_k = sqrt(k^2 + M^2)``. In a Dirichlet cavity
of length ``L`` with the mode centred at ``L / 2`` the integral becomes a sum
over ``k_j = j pi / L``; only odd ``j`` couple to an even profile.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (
    DomainError,
    IRDivergenceError,
    LocalPurityError,
    NumericalError,
    UVDivergenceError,
    ValidationError,
)
from .profiles import ModeProfile, make_profile, sphere_area
from .quadrature import coth_half, geometric_breaks, integrate_panels
from .symplectic import mode_nu

REGULATORS = ("none", "mass", "cavity")
MAX_PANELS = 4_000_000
DIRECT_SUM_LIMIT = 2_000_000
EXPLICIT_MODES = 5000


@dataclass(frozen=True)
class FieldSpec:
    """Free scalar field in ``dim`` spatial dimensions at inverse temperature ``beta``."""

    dim: int = 1
    mass: float = 0.0
    beta: float = math.inf
    regulator: str = "none"
    cavity_length: float | None = None

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValidationError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.mass < 0:
            raise ValidationError("mass must be non-negative")
        if not self.beta > 0:
            raise ValidationError(f"beta must be positive (use inf for the vacuum), got {self.beta}")
        if self.regulator not in REGULATORS:
            raise ValidationError(f"regulator must be one of {REGULATORS}")
        if self.regulator == "mass" and not self.mass > 0:
            raise ValidationError("mass regulator needs mass > 0")
        if self.regulator == "none" and self.mass != 0:
            raise ValidationError("a massive field should use regulator='mass'")
        if self.regulator == "cavity":
            if self.dim != 1:
                raise ValidationError("cavity regulator is only available in one dimension")
            if self.cavity_length is None or not self.cavity_length > 0:
                raise ValidationError("cavity regulator needs cavity_length > 0")
        elif self.cavity_length is not None:
            raise ValidationError("cavity_length given without the cavity regulator")

    @classmethod
    def from_temperature(cls, temperature: float, **kw) -> "FieldSpec":
        """``temperature`` in the same inverse-length units; ``T = 0`` is the vacuum."""
        if temperature < 0:
            raise ValidationError("temperature must be non-negative")
        beta = math.inf if temperature == 0 else 1.0 / temperature
        return cls(beta=beta, **kw)

    def omega(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return np.sqrt(k * k + self.mass**2)

    def with_beta(self, beta: float) -> "FieldSpec":
        return FieldSpec(self.dim, self.mass, beta, self.regulator, self.cavity_length)


@dataclass(frozen=True)
class QuadratureConfig:
    """Accuracy and cutoff policy for the moment integrals.

    ``k_max``: hard wavenumber cutoff for every integral (``None`` = automatic
    tail bound). ``uv_cutoff``: cutoff used only for integrals that diverge in
    the UV. ``cavity_jmax``: explicit number of cavity modes.
    """

    rel_tol: float = 1e-8
    k_max: float | None = None
    uv_cutoff: float | None = None
    cavity_jmax: int | None = None
    order: int = 20

    def __post_init__(self):
        if not 1e-14 < self.rel_tol < 1e-2:
            raise ValidationError(f"rel_tol must lie in (1e-14, 1e-2), got {self.rel_tol}")
        for name in ("k_max", "uv_cutoff"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ValidationError(f"{name} must be positive")
        if self.cavity_jmax is not None and self.cavity_jmax < 1:
            raise ValidationError("cavity_jmax must be >= 1")


DEFAULT_CONFIG = QuadratureConfig()


# ---------------------------------------------------------------------------
# integrands


def _spectral_weight(profile: ModeProfile, which: str, k) -> np.ndarray:
    vt, wt = profile.fourier_amplitude(k)
    return vt * vt if which == "V" else wt * wt


def _integrand(profile: ModeProfile, fld: FieldSpec, which: str):
    dim = profile.dim
    area = sphere_area(dim)
    power = -1.0 if which == "V" else 1.0

    def f(k):
        om = fld.omega(k)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = area * k ** (dim - 1) * om**power * coth_half(fld.beta, om) * _spectral_weight(profile, which, k)
        return np.where(k > 0, out, 0.0) if fld.mass == 0 else out

    return f


def _ir_check(profile: ModeProfile, fld: FieldSpec, which: str) -> None:
    if fld.regulator == "cavity" or fld.mass > 0:
        return
    # massless: integrand ~ k^(n-1+q) * w^(+-1) * coth near k = 0
    exponent = profile.dim - 1 + profile.ir_power + (-1 if which == "V" else 1)
    if np.isfinite(fld.beta):
        exponent -= 1
    if exponent <= -1:
        raise IRDivergenceError(
            f"IR divergence in <{which}^2> for {profile.label} with a massless "
            f"{profile.dim}D field; use a mass or cavity regulator"
        )


def _tail_bound(profile: ModeProfile, fld: FieldSpec, which: str, K: float) -> tuple[float, float]:
    """Upper bound and asymptotic estimate of the integral beyond ``K``.

    Returns ``(bound, estimate)``; ``bound = inf`` signals a UV divergence.
    """
    coef, p, _ = profile.power_envelope()
    if profile.family == "zkappa":
        ok = profile.omega_kappa
        coef = coef * (ok if which == "V" else 1.0 / ok)
    s = -1 if which == "V" else 1
    q = profile.dim - 1 + s - p
    if q >= -1:
        return math.inf, math.inf
    om_factor = 1.0 if s < 0 else math.sqrt(1.0 + (fld.mass / K) ** 2)
    thermal = float(coth_half(fld.beta, np.array([fld.omega(K)]))[0])
    area = sphere_area(profile.dim)
    base = area * coef * K ** (q + 1) / (-(q + 1))
    return base * om_factor * thermal, base * profile.tail_mean_factor() * thermal


def _breaks(profile: ModeProfile, fld: FieldSpec, K: float) -> np.ndarray:
    osc = profile.oscillation_scale
    step = 0.5 * osc
    scales = [osc]
    if fld.mass > 0:
        scales.append(fld.mass)
    if np.isfinite(fld.beta):
        scales.append(1.0 / fld.beta)
    lo = 1e-7 * min(scales)
    head = np.concatenate([[0.0], geometric_breaks(lo, osc, 1.5)])
    n = int(np.ceil((K - osc) / step))
    if n > MAX_PANELS:
        raise NumericalError(f"cutoff {K:.3e} needs {n} panels; tolerance unreachable")
    body = osc + step * np.arange(1, n + 1)
    return np.concatenate([head, body[body < K], [K]]) if n > 0 else np.array([0.0, K])


def _initial_cutoff(profile: ModeProfile) -> float:
    _, _, k0 = profile.power_envelope()
    return max(k0, profile.peak_wavenumber) + 64.0 * profile.oscillation_scale * max(profile.m, 2)


def _tail_exponent(profile: ModeProfile, which: str) -> int:
    _, p, _ = profile.power_envelope()
    return profile.dim - 1 + (-1 if which == "V" else 1) - p


def _free_analog(fld: FieldSpec) -> FieldSpec:
    if fld.regulator != "cavity":
        return fld
    return FieldSpec(1, fld.mass, fld.beta, "mass" if fld.mass > 0 else "none")


def _resolve_cutoff(profile: ModeProfile, fld: FieldSpec, which: str,
                    cfg: QuadratureConfig) -> tuple[float, bool]:
    """Upper wavenumber and whether the asymptotic tail estimate should be added."""
    if cfg.k_max is not None:
        return cfg.k_max, False
    free = _free_analog(fld)
    K = _initial_cutoff(profile)
    bound, _ = _tail_bound(profile, free, which, K)
    if not np.isfinite(bound):
        if cfg.uv_cutoff is None:
            raise UVDivergenceError(
                f"<{which}^2> for {profile.label} diverges in the UV; set an explicit uv_cutoff"
            )
        return cfg.uv_cutoff, False
    # scale of the integral, only used to set the tail target
    scale = integrate_panels(_integrand(profile, free, which), _breaks(profile, free, K), cfg.order)
    target = 0.1 * cfg.rel_tol * abs(scale)
    if bound > target:
        K = K * (bound / target) ** (1.0 / (-(_tail_exponent(profile, which) + 1)))
    return K, True


def _free_moment(profile: ModeProfile, fld: FieldSpec, which: str, cfg: QuadratureConfig) -> float:
    _ir_check(profile, fld, which)
    K, with_tail = _resolve_cutoff(profile, fld, which, cfg)
    body = integrate_panels(_integrand(profile, fld, which), _breaks(profile, fld, K), cfg.order)
    if with_tail:
        body += _tail_bound(profile, fld, which, K)[1]
    return body


# ---------------------------------------------------------------------------
# cavity sums


def _cavity_terms(profile: ModeProfile, fld: FieldSpec, which: str, k: np.ndarray) -> np.ndarray:
    L = fld.cavity_length
    om = fld.omega(k)
    power = -1.0 if which == "V" else 1.0
    # |int v u_j|^2 = (4 pi / L) |v~(k_j)|^2 for odd j, mode centred at L/2
    return (4.0 * np.pi / L) * om**power * coth_half(fld.beta, om) * _spectral_weight(profile, which, k)


def _chunked_sum(profile, fld, which, start, stop, k_of, chunk=500_000) -> float:
    parts = []
    for lo in range(start, stop, chunk):
        k = k_of(np.arange(lo, min(stop, lo + chunk)))
        parts.append(np.sum(_cavity_terms(profile, fld, which, k)))
    return float(np.sum(parts))


def _cavity_moment(profile: ModeProfile, fld: FieldSpec, which: str, cfg: QuadratureConfig) -> float:
    """Mode sum over odd ``j``.

    The odd modes are spaced by ``delta = 2 pi / L`` and carry weight
    ``4 pi / L = 2 delta``, so ``(1 / delta) int f dk`` equals the free 1D
    integral; that identity supplies both the tail and the Euler-Maclaurin
    remainder.
    """
    L = fld.cavity_length
    if profile.dim != 1:
        raise ValidationError("cavity sums are only defined for 1D profiles")
    if not L > 2.0 * profile.ell:
        raise ValidationError(f"cavity length {L} must exceed the mode support 2*ell = {2 * profile.ell}")
    delta = 2.0 * np.pi / L

    def k_of(i):
        return (2.0 * np.asarray(i, dtype=float) + 1.0) * np.pi / L

    if cfg.cavity_jmax is not None:
        return _chunked_sum(profile, fld, which, 0, (cfg.cavity_jmax + 1) // 2, k_of)
    K, with_tail = _resolve_cutoff(profile, fld, which, cfg)
    free = _free_analog(fld)
    n_total = int(np.ceil(K / delta))
    if n_total <= DIRECT_SUM_LIMIT:
        total = _chunked_sum(profile, fld, which, 0, n_total, k_of)
        if with_tail:
            total += _tail_bound(profile, free, which, float(k_of(n_total)) - 0.5 * delta)[1]
        return total
    head = _chunked_sum(profile, fld, which, 0, EXPLICIT_MODES, k_of)
    a = float(k_of(EXPLICIT_MODES))
    breaks = _breaks(profile, free, K)
    breaks = np.concatenate([[a], breaks[breaks > a]])
    continuum = integrate_panels(_integrand(profile, free, which), breaks, cfg.order)
    if with_tail:
        continuum += _tail_bound(profile, free, which, K)[1]
    h = 0.5 * delta
    f = _cavity_terms(profile, fld, which, np.array([a - h, a, a + h]))
    return head + continuum + 0.5 * f[1] - delta * (f[2] - f[0]) / (2 * h) / 12.0


# ---------------------------------------------------------------------------
# public operations


def _check_compat(profile: ModeProfile, fld: FieldSpec) -> None:
    if profile.dim != fld.dim:
        raise ValidationError(f"profile is {profile.dim}D but the field is {fld.dim}D")


def second_moment(profile: ModeProfile, fld: FieldSpec, which: str,
                  cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    if which not in ("V", "W"):
        raise ValidationError("which must be 'V' or 'W'")
    _check_compat(profile, fld)
    if fld.regulator == "cavity":
        value = _cavity_moment(profile, fld, which, cfg)
    else:
        value = _free_moment(profile, fld, which, cfg)
    if not np.isfinite(value) or value <= 0:
        raise NumericalError(f"<{which}^2> evaluated to {value} for {profile.label}", achieved=None)
    return float(value)


def second_moment_V(profile: ModeProfile, fld: FieldSpec, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Covariance entry ``<{V, V}>`` of the smeared field."""
    return second_moment(profile, fld, "V", cfg)


def second_moment_W(profile: ModeProfile, fld: FieldSpec, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Covariance entry ``<{W, W}>`` of the smeared conjugate momentum."""
    return second_moment(profile, fld, "W", cfg)


def mode_purity(profile: ModeProfile, fld: FieldSpec,
                cfg: QuadratureConfig = DEFAULT_CONFIG) -> tuple[float, float]:
    """``(nu, purity)`` of the local mode; thermal states have no V-W cross term."""
    vv = second_moment_V(profile, fld, cfg)
    ww = second_moment_W(profile, fld, cfg)
    nu = mode_nu(vv, ww, 0.0)
    if nu < 1.0 - 1e-6:
        raise NumericalError(f"nu = {nu:.10f} violates the uncertainty bound for {profile.label}", achieved=1.0 - nu)
    return nu, 1.0 / nu


# ---------------------------------------------------------------------------
# grids


@dataclass
class PurityGrid:
    """Purity over (temperature ratio, size ratio).

    ``values[i, j]`` is the purity at ``y_axis[i]`` (size) and ``x_axis[j]``
    (temperature). Failed cells hold NaN and an entry in ``errors``.
    """

    x_axis: np.ndarray
    y_axis: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors


def grid_point_field(field_template: FieldSpec, x: float, y: float) -> tuple[float, FieldSpec]:
    """Map a grid cell to ``(ell, field)``.

    Mass regulator: ``x = k_B T / M``, ``y = ell M`` with ``M`` from the template.
    Cavity: ``x = k_B T L``, ``y = ell / L``.
    """
    if field_template.regulator == "mass":
        M = field_template.mass
        return y / M, field_template.with_beta(1.0 / (x * M))
    if field_template.regulator == "cavity":
        L = field_template.cavity_length
        return y * L, field_template.with_beta(L / x)
    raise ValidationError("purity grids need a mass or cavity regulator to set the scale")


def _profile_at(profile_spec: dict, ell: float, mass: float = 0.0) -> ModeProfile:
    """Build a profile of size ``ell``; ``kappa_ell`` keeps ``kappa * ell`` fixed."""
    kappa = profile_spec.get("kappa")
    if profile_spec.get("kappa_ell") is not None:
        kappa = profile_spec["kappa_ell"] / ell
    return make_profile(profile_spec["family"], profile_spec["m"], ell, kappa=kappa, mass=mass)


def _cell(args):
    profile_spec, field_template, cfg, x, y = args
    try:
        ell, fld = grid_point_field(field_template, x, y)
        _, purity = mode_purity(_profile_at(profile_spec, ell, fld.mass), fld, cfg)
        return purity, None
    except LocalPurityError as exc:
        return math.nan, f"{type(exc).__name__}: {exc}"


def _run_cells(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [_cell(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_cell, tasks, chunksize=1))


def purity_grid(profile_spec: dict, field_template: FieldSpec, x_values, y_values,
                cfg: QuadratureConfig = DEFAULT_CONFIG, workers: int = 1) -> PurityGrid:
    """Evaluate :func:`mode_purity` on the product grid ``y_values x x_values``.

    ``profile_spec`` is ``{family, m[, kappa]}``; ``ell`` comes from the grid.
    Each cell is computed independently so the result does not depend on
    ``workers``.
    """
    x_values = np.asarray(x_values, dtype=float)
    y_values = np.asarray(y_values, dtype=float)
    if x_values.ndim != 1 or y_values.ndim != 1 or not x_values.size or not y_values.size:
        raise ValidationError("grid axes must be non-empty 1D sequences")
    if np.any(x_values <= 0) or np.any(y_values <= 0):
        raise ValidationError("grid axes must be positive")
    tasks = [(profile_spec, field_template, cfg, float(x), float(y)) for y in y_values for x in x_values]
    results = _run_cells(tasks, workers)
    values = np.array([r[0] for r in results]).reshape(y_values.size, x_values.size)
    errors = {}
    for idx, (_, err) in enumerate(results):
        if err is not None:
            errors[f"{idx // x_values.size},{idx % x_values.size}"] = err
    metadata = {
        "profile": dict(profile_spec),
        "field": asdict(field_template),
        "config": asdict(cfg),
    }
    return PurityGrid(x_values, y_values, values, metadata, errors)


def log_axis(lo: float, hi: float, n: int) -> np.ndarray:
    if n < 1 or not (lo > 0 and hi > 0):
        raise ValidationError("log axis needs positive bounds and n >= 1")
    return np.array([lo]) if n == 1 else np.geomspace(lo, hi, n)


def _curve_cell(args):
    profile, fld, cfg = args
    try:
        return mode_purity(profile, fld, cfg)[1], None
    except LocalPurityError as exc:
        return math.nan, f"{type(exc).__name__}: {exc}"


def purity_curve(profile_spec: dict, field_template: FieldSpec, temperatures,
                 cfg: QuadratureConfig = DEFAULT_CONFIG, workers: int = 1) -> PurityGrid:
    """Purity of a fixed-size mode against ``x = k_B T ell``.

    ``profile_spec["ell"]`` (default 1) sets the size in the field's units;
    the result is a one-row grid with ``y_axis = [ell]``.
    """
    ell = float(profile_spec.get("ell", 1.0))
    temps = np.asarray(temperatures, dtype=float)
    if temps.ndim != 1 or not temps.size or np.any(temps <= 0):
        raise ValidationError("temperatures must be a non-empty list of positive values")
    profile = _profile_at(profile_spec, ell, field_template.mass)
    tasks = [(profile, field_template.with_beta(ell / t), cfg) for t in temps]
    if workers <= 1 or len(tasks) <= 1:
        results = [_curve_cell(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_curve_cell, tasks, chunksize=1))
    values = np.array([[r[0] for r in results]])
    errors = {f"0,{j}": r[1] for j, r in enumerate(results) if r[1] is not None}
    metadata = {"profile": dict(profile_spec), "field": asdict(field_template), "config": asdict(cfg)}
    return PurityGrid(temps, np.array([ell]), values, metadata, errors)


# ---------------------------------------------------------------------------
# minimally mixed modes


def u_objective(m: int, kappa: float, ell: float, beta: float,
                cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``u = (Sigma_VV + Sigma_WW) / 2`` for the ``z_{m, kappa}`` mode in a massless 1D field.

    For ``m = 3`` the momentum moment is logarithmically UV divergent and an
    explicit ``cfg.uv_cutoff`` is needed.
    """
    if int(m) != m or m < 3:
        raise ValidationError(f"u_objective requires integer m >= 3, got {m}")
    profile = make_profile("zkappa", int(m), ell, kappa=kappa)
    fld = FieldSpec(dim=1, beta=beta)
    vv = second_moment_V(profile, fld, cfg)
    ww = second_moment_W(profile, fld, cfg)
    return 0.5 * (vv + ww)


@dataclass(frozen=True)
class ScanResult:
    m: int
    kappa: float
    u: float
    table: tuple = ()


def min_mixedness_scan(ell: float, beta: float, m_range, kappa_range,
                       cfg: QuadratureConfig = DEFAULT_CONFIG) -> ScanResult:
    """Grid minimizer of :func:`u_objective` over ``m_range x kappa_range``."""
    m_range = list(m_range)
    kappa_range = list(kappa_range)
    if not m_range or not kappa_range:
        raise ValidationError("m_range and kappa_range must be non-empty")
    rows = []
    for m in m_range:
        for kappa in kappa_range:
            rows.append((int(m), float(kappa), u_objective(m, kappa, ell, beta, cfg)))
    best = min(rows, key=lambda r: (r[2], r[0], r[1]))
    return ScanResult(best[0], best[1], best[2], tuple(rows))


__all__ = [
    "FieldSpec",
    "QuadratureConfig",
    "PurityGrid",
    "second_moment_V",
    "second_moment_W",
    "mode_purity",
    "purity_grid",
    "purity_curve",
    "u_objective",
    "min_mixedness_scan",
    "DomainError",
]
