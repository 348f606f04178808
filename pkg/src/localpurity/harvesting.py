"""Perturbative entanglement harvesting with thermally mixed detectors.

Two Unruh-DeWitt probes (qubits or harmonic oscillators) couple linearly to
a free scalar field through Gaussian spacetime smearings

    Lambda_i(t, x) = G_{sigma_i}(x - x_i) * chi_i(t),

both normalized to unit integral. To second order in the couplings and first
order in the Boltzmann factors the joint state is fixed by the local terms
``L_ij``, the pairing term ``M`` and (oscillators) the double-excitation terms
``K_i``.

Every field we support has a Wightman function of the form

    W(x, x') = sum_branch g_b * int dmu(k) P(k; x, x') exp(-i s_b w_k (t - t'))

(``s_b = +1`` with weight ``1 + n(w)``, ``s_b = -1`` with weight ``n(w)``),
so the spacetime integrals reduce to a one-dimensional ``k`` rule times
Gaussian time integrals that are evaluated in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import wofz

from .errors import IRDivergenceError, NumericalError, ValidationError
from .quadrature import bose_occupation, geometric_breaks, panel_nodes
from .thermal import FieldSpec, QuadratureConfig

KINDS = ("qubit", "oscillator")


def boltzmann_z(beta: float, gap: float) -> float:
    """Boltzmann factor ``z = exp(-beta * gap)``; ``beta = inf`` gives 0."""
    if not gap > 0:
        raise ValidationError(f"gap must be positive, got {gap}")
    if not beta > 0:
        raise ValidationError(f"beta must be positive or inf, got {beta}")
    return 0.0 if math.isinf(beta) else math.exp(-beta * gap)


def beta_from_z(z: float, gap: float) -> float:
    """Inverse of :func:`boltzmann_z`."""
    _check_z(z)
    if not gap > 0:
        raise ValidationError(f"gap must be positive, got {gap}")
    return math.inf if z == 0 else -math.log(z) / gap


def _check_z(z: float) -> None:
    if not 0.0 <= z < 1.0:
        raise ValidationError(f"Boltzmann factor must lie in [0, 1), got {z}")


def detector_purity(kind: str, z: float) -> float:
    """Purity of a thermal qubit ``(1+z^2)/(1+z)^2`` or oscillator ``(1-z)/(1+z)``."""
    _check_z(z)
    if kind == "qubit":
        return (1.0 + z * z) / (1.0 + z) ** 2
    if kind == "oscillator":
        return (1.0 - z) / (1.0 + z)
    raise ValidationError(f"unknown detector kind {kind!r}")


@dataclass(frozen=True)
class DetectorSpec:
    """An inertial Unruh-DeWitt probe at rest in the field frame.

    ``center`` has one component for 1D fields (absolute position inside a
    cavity) and three for 3D fields.
    """

    kind: str = "qubit"
    gap: float = 1.0
    coupling: float = 1.0
    z: float = 0.0
    center: tuple = (0.0, 0.0, 0.0)
    spatial_width: float = 1.0
    switch_center: float = 0.0
    switch_width: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"detector kind must be one of {KINDS}, got {self.kind!r}")
        if not self.gap > 0:
            raise ValidationError("gap must be positive")
        if not self.coupling >= 0:
            raise ValidationError("coupling must be non-negative")
        _check_z(self.z)
        if not (self.spatial_width > 0 and self.switch_width > 0):
            raise ValidationError("smearing widths must be positive")
        center = tuple(float(c) for c in np.atleast_1d(self.center))
        if len(center) not in (1, 3):
            raise ValidationError("center must have 1 or 3 components")
        object.__setattr__(self, "center", center)

    def with_coupling(self, coupling: float) -> "DetectorSpec":
        return DetectorSpec(self.kind, self.gap, coupling, self.z, self.center,
                            self.spatial_width, self.switch_center, self.switch_width)

    def with_z(self, z: float) -> "DetectorSpec":
        return DetectorSpec(self.kind, self.gap, self.coupling, z, self.center,
                            self.spatial_width, self.switch_center, self.switch_width)

    def switching_transform(self, nu) -> np.ndarray:
        """``int chi(t) exp(-i nu t) dt`` for the normalized Gaussian switching."""
        nu = np.asarray(nu, dtype=float)
        return np.exp(-1j * nu * self.switch_center - 0.5 * (nu * self.switch_width) ** 2)


@dataclass(frozen=True)
class HarvestElements:
    """Second-order matrix elements; ``L[0, 1]`` is ``L_AB``."""

    L: np.ndarray
    M: complex
    K_A: complex
    K_B: complex

    def __post_init__(self):
        L = np.array(self.L, dtype=complex)
        if L.shape != (2, 2):
            raise ValidationError("L must be 2x2")
        L.setflags(write=False)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "M", complex(self.M))
        object.__setattr__(self, "K_A", complex(self.K_A))
        object.__setattr__(self, "K_B", complex(self.K_B))

    @property
    def L_AA(self) -> float:
        return float(self.L[0, 0].real)

    @property
    def L_BB(self) -> float:
        return float(self.L[1, 1].real)

    @property
    def L_AB(self) -> complex:
        return complex(self.L[0, 1])

    def scaled(self, factor_a: float, factor_b: float) -> "HarvestElements":
        """Elements after multiplying the couplings by ``factor_a`` and ``factor_b``."""
        f = np.array([factor_a, factor_b])
        return HarvestElements(self.L * np.outer(f, f), self.M * factor_a * factor_b,
                               self.K_A * factor_a**2, self.K_B * factor_b**2)

    def to_mapping(self) -> dict:
        def c(x):
            return [float(np.real(x)), float(np.imag(x))]

        return {
            "L_AA": self.L_AA,
            "L_BB": self.L_BB,
            "L_AB": c(self.L_AB),
            "M": c(self.M),
            "K_A": c(self.K_A),
            "K_B": c(self.K_B),
        }

    @classmethod
    def from_mapping(cls, d: dict) -> "HarvestElements":
        def c(x):
            return complex(x[0], x[1]) if isinstance(x, (list, tuple)) else complex(x)

        lab = c(d["L_AB"])
        L = [[d["L_AA"], lab], [np.conj(lab), d["L_BB"]]]
        return cls(L, c(d["M"]), c(d.get("K_A", 0.0)), c(d.get("K_B", 0.0)))


# ---------------------------------------------------------------------------
# time integrals


def _half_line(p, q, c):
    """``int_c^inf exp(-p u^2 + i q u) du`` for ``p > 0`` (vectorized in ``q``)."""
    q = np.asarray(q, dtype=float)
    sp = math.sqrt(p)

    def upper(c_, q_):
        zeta = sp * c_ - 1j * q_ / (2 * sp)
        return (math.sqrt(math.pi) / (2 * sp)) * np.exp(-p * c_ * c_ + 1j * q_ * c_) * wofz(1j * zeta)

    if c >= 0:
        return upper(c, q)
    full = math.sqrt(math.pi / p) * np.exp(-q * q / (4 * p))
    return full - upper(-c, -q)


def ordered_time_integral(a, b, det1: DetectorSpec, det2: DetectorSpec) -> np.ndarray:
    """``int dt dt' Theta(t - t') exp(i a t + i b t') chi_1(t) chi_2(t')``.

    With ``t = t_1 + x``, ``t' = t_2 + y``, ``u = x - y`` and ``c = T_1^2 / T_2^2``
    the Gaussian weight separates in ``u`` and ``s = x + c y``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    T1, T2 = det1.switch_width, det2.switch_width
    t1, t2 = det1.switch_center, det2.switch_center
    c = T1 * T1 / (T2 * T2)
    tot = T1 * T1 + T2 * T2
    p_u = 1.0 / (2.0 * tot)
    p_s = T2 * T2 / (2.0 * T1 * T1 * tot)
    q_u = (a * c - b) / (1.0 + c)
    q_s = (a + b) / (1.0 + c)
    s_part = math.sqrt(math.pi / p_s) * np.exp(-q_s * q_s / (4 * p_s))
    u_part = _half_line(p_u, q_u, t2 - t1)
    norm = 1.0 / (2.0 * math.pi * T1 * T2 * (1.0 + c))
    return norm * np.exp(1j * (a * t1 + b * t2)) * s_part * u_part


# ---------------------------------------------------------------------------
# field kernels


@dataclass
class _Kernel:
    """Discretized Wightman function: nodes, measure, pair factors."""

    omega: np.ndarray
    weight: np.ndarray
    pair: dict = field(default_factory=dict)


def _distance(a: DetectorSpec, b: DetectorSpec) -> float:
    return float(np.linalg.norm(np.subtract(a.center, b.center)))


def _continuum_breaks(dets, fld: FieldSpec, cfg: QuadratureConfig, refine: int) -> np.ndarray:
    sig = max(d.spatial_width for d in dets)
    sig_min = min(d.spatial_width for d in dets)
    tmin = min(d.switch_width for d in dets)
    dmax = _distance(*dets)
    # spatial Gaussians e^{-k^2 sigma^2} bound every integrand
    K = math.sqrt(2.0 * math.log(1.0 / (0.01 * cfg.rel_tol))) / sig_min
    if cfg.k_max is not None:
        K = cfg.k_max
    step = 0.25 * min(1.0 / sig, 1.0 / tmin, math.pi / dmax if dmax > 0 else math.inf) / refine
    n = max(1, int(math.ceil(K / step)))
    breaks = np.linspace(0.0, K, n + 1)
    if fld.dim == 1 and fld.mass > 0 and fld.mass < step:
        # resolve the 1 / w_k peak below the mass scale
        head = geometric_breaks(1e-3 * fld.mass / refine, step, 1.5 ** (1.0 / refine))
        breaks = np.concatenate([[0.0], head, breaks[2:]])
    return breaks


def _pair_factor(fld: FieldSpec, di: DetectorSpec, dj: DetectorSpec, k: np.ndarray) -> np.ndarray:
    spread = np.exp(-0.5 * k * k * (di.spatial_width**2 + dj.spatial_width**2))
    d = _distance(di, dj)
    if fld.dim == 3:
        return np.sinc(k * d / np.pi) * spread
    return np.cos(k * d) * spread


def _build_kernel(dets, fld: FieldSpec, cfg: QuadratureConfig, refine: int = 1) -> _Kernel:
    if fld.regulator == "cavity":
        return _cavity_kernel(dets, fld, cfg)
    if fld.dim == 3:
        if fld.mass != 0:
            raise ValidationError("3D harvesting is implemented for a massless field")
        k, w = panel_nodes(_continuum_breaks(dets, fld, cfg, refine), cfg.order)
        # d^3k / ((2 pi)^3 2 w) with the angular integral giving 4 pi sinc(k d)
        weight = w * k / (4.0 * np.pi**2)
    elif fld.dim == 1:
        if fld.mass == 0:
            raise IRDivergenceError("massless 1D field without a cavity is IR divergent for harvesting")
        k, w = panel_nodes(_continuum_breaks(dets, fld, cfg, refine), cfg.order)
        weight = w / (2.0 * np.pi * np.sqrt(k * k + fld.mass**2))
    else:
        raise ValidationError("harvesting supports 1D and 3D fields")
    kern = _Kernel(fld.omega(k), weight)
    for i in range(2):
        for j in range(i, 2):
            kern.pair[(i, j)] = _pair_factor(fld, dets[i], dets[j], k)
    return kern


def _cavity_kernel(dets, fld: FieldSpec, cfg: QuadratureConfig) -> _Kernel:
    L = fld.cavity_length
    for d in dets:
        x = d.center[0]
        if len(d.center) != 1 or not 0 < x < L:
            raise ValidationError("cavity detectors need a single coordinate inside (0, L)")
    sig_min = min(d.spatial_width for d in dets)
    K = cfg.k_max or math.sqrt(2.0 * math.log(1.0 / (0.01 * cfg.rel_tol))) / sig_min
    jmax = cfg.cavity_jmax or max(1, int(math.ceil(K * L / math.pi)))
    k = np.arange(1, jmax + 1) * np.pi / L
    om = fld.omega(k)
    # Dirichlet modes sqrt(2/L) sin(k x); Gaussian smearing well inside the walls
    prof = [math.sqrt(2.0 / L) * np.sin(k * d.center[0]) * np.exp(-0.5 * (k * d.spatial_width) ** 2) for d in dets]
    kern = _Kernel(om, 1.0 / (2.0 * om))
    for i in range(2):
        for j in range(i, 2):
            kern.pair[(i, j)] = prof[i] * prof[j]
    return kern


def _branches(fld: FieldSpec, omega: np.ndarray):
    if math.isinf(fld.beta):
        return [(1.0, np.ones_like(omega))]
    n = bose_occupation(fld.beta, omega)
    return [(1.0, 1.0 + n), (-1.0, n)]


def _elements_from_kernel(kern: _Kernel, dets, fld: FieldSpec) -> HarvestElements:
    A, B = dets
    om = kern.omega
    L = np.zeros((2, 2), dtype=complex)
    M = 0.0j
    K = [0.0j, 0.0j]
    for s, g in _branches(fld, om):
        so = s * om
        chat = [d.switching_transform(d.gap + so) for d in dets]
        for i in range(2):
            for j in range(i, 2):
                val = np.sum(kern.weight * g * kern.pair[(i, j)] * chat[i] * np.conj(chat[j]))
                L[i, j] += dets[i].coupling * dets[j].coupling * val
        pab = kern.pair[(0, 1)]
        m = ordered_time_integral(A.gap - so, B.gap + so, A, B) + ordered_time_integral(B.gap - so, A.gap + so, B, A)
        M += -A.coupling * B.coupling * np.sum(kern.weight * g * pab * m)
        for i, d in enumerate(dets):
            t = ordered_time_integral(d.gap - so, d.gap + so, d, d)
            # <2| a^dag a^dag |0> = sqrt(2) for an oscillator
            K[i] += -math.sqrt(2.0) * d.coupling**2 * np.sum(kern.weight * g * kern.pair[(i, i)] * t)
    L[1, 0] = np.conj(L[0, 1])
    L[0, 0] = L[0, 0].real
    L[1, 1] = L[1, 1].real
    return HarvestElements(L, M, K[0], K[1])


def compute_elements(det_a: DetectorSpec, det_b: DetectorSpec, fld: FieldSpec,
                     cfg: QuadratureConfig = QuadratureConfig()) -> HarvestElements:
    """Matrix elements ``L_ij, M, K_i`` for two inertial detectors.

    Supported fields: massless 3D (vacuum or thermal), 1D Dirichlet cavity and
    massive 1D. Continuum rules are checked against a twice finer rule.
    """
    dets = (det_a, det_b)
    want = 3 if fld.dim == 3 else 1
    for d in dets:
        if len(d.center) != want:
            raise ValidationError(f"detector center must have {want} component(s) for a {fld.dim}D field")
    coarse = _elements_from_kernel(_build_kernel(dets, fld, cfg, 1), dets, fld)
    if fld.regulator == "cavity" or cfg.k_max is not None:
        return coarse
    fine = _elements_from_kernel(_build_kernel(dets, fld, cfg, 2), dets, fld)
    scale = max(abs(fine.L_AA), abs(fine.L_BB), abs(fine.M), 1e-300)
    diff = max(np.max(np.abs(fine.L - coarse.L)), abs(fine.M - coarse.M),
               abs(fine.K_A - coarse.K_A), abs(fine.K_B - coarse.K_B)) / scale
    if diff > cfg.rel_tol:
        raise NumericalError(f"harvesting quadrature did not converge (relative change {diff:.2e})", achieved=diff)
    return fine


# ---------------------------------------------------------------------------
# states and negativity


BASIS = {
    "qubit": ((0, 0), (0, 1), (1, 0), (1, 1)),
    "oscillator": ((0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (2, 0)),
}


@dataclass(frozen=True)
class TwoDetectorState:
    """Joint detector state in the ordered basis ``BASIS[kind]`` of ``|n_A n_B>``."""

    kind: str
    rho: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown detector kind {self.kind!r}")
        rho = np.array(self.rho, dtype=complex)
        n = len(BASIS[self.kind])
        if rho.shape != (n, n):
            raise ValidationError(f"{self.kind} state must be {n}x{n}")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(rho))):
            raise ValidationError("density matrix must be Hermitian")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def basis(self) -> tuple:
        return BASIS[self.kind]


def assemble_state(elements: HarvestElements, z_a: float, z_b: float, kind: str) -> TwoDetectorState:
    """Second-order joint state with thermal populations to first order in ``z``.

    ``rho[<01|, |10>] = L_AB``: the excitation of detector ``j`` in the ket
    pairs with ``i`` in the bra as ``rho(e_i, e_j) = L_ji``.
    """
    _check_z(z_a)
    _check_z(z_b)
    if kind not in KINDS:
        raise ValidationError(f"unknown detector kind {kind!r}")
    n = len(BASIS[kind])
    rho = np.zeros((n, n), dtype=complex)
    pa = elements.L_AA + z_a
    pb = elements.L_BB + z_b
    rho[0, 0] = 1.0 - pa - pb
    rho[1, 1] = pb
    rho[2, 2] = pa
    rho[1, 2] = elements.L_AB
    rho[2, 1] = np.conj(elements.L_AB)
    rho[3, 0] = elements.M
    rho[0, 3] = np.conj(elements.M)
    if kind == "oscillator":
        rho[4, 0] = elements.K_B
        rho[0, 4] = np.conj(elements.K_B)
        rho[5, 0] = elements.K_A
        rho[0, 5] = np.conj(elements.K_A)
    return TwoDetectorState(kind, rho)


def leading_eigenvalue(elements: HarvestElements, z_a: float, z_b: float) -> float:
    """``E_1 = (P_A + P_B - sqrt((P_A - P_B)^2 + 4|M|^2)) / 2`` with ``P_i = L_ii + z_i``."""
    _check_z(z_a)
    _check_z(z_b)
    pa = elements.L_AA + z_a
    pb = elements.L_BB + z_b
    return 0.5 * (pa + pb - math.sqrt((pa - pb) ** 2 + 4.0 * abs(elements.M) ** 2))


def negativity(elements: HarvestElements, z_a: float, z_b: float) -> float:
    """Leading-order negativity ``max(-E_1, 0)``.

    For ``z_a == z_b == z`` this is evaluated as ``max(N_0 - z, 0)``, which is
    algebraically the same and keeps the identity exact in floating point.
    """
    if z_a == z_b:
        n0 = max(-leading_eigenvalue(elements, 0.0, 0.0), 0.0)
        _check_z(z_a)
        return max(n0 - z_a, 0.0)
    return max(-leading_eigenvalue(elements, z_a, z_b), 0.0)


@dataclass(frozen=True)
class Threshold:
    """Threshold mixedness and critical-coupling law ``lambda_c(z) = lambda_ref sqrt(z / z_c)``."""

    z_c: float
    lambda_ref: float

    @property
    def harvests(self) -> bool:
        return self.z_c > 0

    def lambda_c(self, z):
        if not self.harvests:
            raise ValidationError("no harvesting at any z for this geometry")
        z = np.asarray(z, dtype=float)
        if np.any(z < 0) or np.any(z >= 1):
            raise ValidationError("z must lie in [0, 1)")
        out = self.lambda_ref * np.sqrt(z / self.z_c)
        return float(out) if out.ndim == 0 else out

    def describe(self) -> str:
        if not self.harvests:
            return "no harvesting at any z"
        return f"lambda_c(z) = {self.lambda_ref!r} * sqrt(z / {self.z_c!r})"


def threshold(elements: HarvestElements, lambda_ref: float = 1.0) -> Threshold:
    """``z_c = N_{z=0}``; elements must have been computed at coupling ``lambda_ref``."""
    if not lambda_ref > 0:
        raise ValidationError("lambda_ref must be positive")
    return Threshold(negativity(elements, 0.0, 0.0), float(lambda_ref))


def _embed(state: TwoDetectorState) -> tuple[np.ndarray, int]:
    levels = 2 if state.kind == "qubit" else 3
    full = np.zeros((levels * levels, levels * levels), dtype=complex)
    idx = [a * levels + b for a, b in state.basis]
    full[np.ix_(idx, idx)] = state.rho
    return full, levels


def partial_transpose(state: TwoDetectorState) -> np.ndarray:
    """Partial transpose over detector B on the full ``levels^2`` product space."""
    full, levels = _embed(state)
    r = full.reshape(levels, levels, levels, levels)
    return r.transpose(0, 3, 2, 1).reshape(levels * levels, levels * levels)


def pt_negativity_oracle(state: TwoDetectorState) -> float:
    """Sum of the moduli of the negative eigenvalues of the partial transpose."""
    ev = np.linalg.eigvalsh(partial_transpose(state))
    return float(-np.sum(ev[ev < 0]))


__all__ = [
    "DetectorSpec",
    "HarvestElements",
    "TwoDetectorState",
    "Threshold",
    "boltzmann_z",
    "beta_from_z",
    "detector_purity",
    "compute_elements",
    "ordered_time_integral",
    "assemble_state",
    "leading_eigenvalue",
    "negativity",
    "threshold",
    "partial_transpose",
    "pt_negativity_oracle",
]
