"""Gaussian phase-space toolkit.

Quadratures are ordered ``(q1, p1, ..., qn, pn)`` and hbar = 1. Covariance
matrices use the symmetrized convention ``sigma = <{X, X}> - 2 <X><X>`` so the
vacuum of a single mode has ``sigma = identity`` and every physical state has
symplectic eigenvalues ``nu >= 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, schur, sqrtm

from .errors import DomainError, ValidationError

SYMMETRY_RTOL = 1e-10
SYMPLECTIC_RTOL = 1e-10
PHYSICAL_ATOL = 1e-9


def _block(n_modes: int, upper: float) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, upper], [-upper, 0.0]]))


def symplectic_form(n_modes: int) -> np.ndarray:
    """Lower-index form, 2x2 blocks ``[[0, -1], [1, 0]]``."""
    if n_modes < 1:
        raise ValidationError(f"n_modes must be positive, got {n_modes}")
    return _block(n_modes, -1.0)


def inverse_symplectic_form(n_modes: int) -> np.ndarray:
    """Upper-index form, 2x2 blocks ``[[0, 1], [-1, 0]]``; ``[X^a, X^b] = i J^{ab}``."""
    if n_modes < 1:
        raise ValidationError(f"n_modes must be positive, got {n_modes}")
    return _block(n_modes, 1.0)


@dataclass(frozen=True)
class SymplecticForm:
    n_modes: int
    matrix: np.ndarray = field(init=False, repr=False)
    inverse: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "matrix", symplectic_form(self.n_modes))
        object.__setattr__(self, "inverse", inverse_symplectic_form(self.n_modes))


def _as_square(a, name: str) -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2:
        raise ValidationError(f"{name} must be a 2n x 2n matrix, got shape {a.shape}")
    return a


def _check_symmetric(a: np.ndarray, name: str) -> None:
    scale = max(np.max(np.abs(a)), 1.0)
    if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
        raise ValidationError(f"{name} is not symmetric")


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric positive-definite 2n x 2n covariance matrix."""

    sigma: np.ndarray

    def __post_init__(self):
        s = _as_square(self.sigma, "covariance")
        _check_symmetric(s, "covariance")
        s = 0.5 * (s + s.T)
        s.setflags(write=False)
        object.__setattr__(self, "sigma", s)

    @property
    def n_modes(self) -> int:
        return self.sigma.shape[0] // 2

    def spectrum(self) -> np.ndarray:
        return symplectic_spectrum(self)

    def purity(self) -> float:
        return purity_from_spectrum(self.spectrum())

    def is_physical(self, atol: float = PHYSICAL_ATOL) -> bool:
        return bool(np.all(self.spectrum() >= 1.0 - atol))


@dataclass(frozen=True)
class GaussianState:
    first_moments: np.ndarray
    covariance: CovarianceMatrix

    def __post_init__(self):
        cov = self.covariance
        if not isinstance(cov, CovarianceMatrix):
            cov = CovarianceMatrix(cov)
            object.__setattr__(self, "covariance", cov)
        xi = np.array(self.first_moments, dtype=float).reshape(-1)
        if xi.shape[0] != cov.sigma.shape[0]:
            raise ValidationError(
                f"first moments have length {xi.shape[0]}, covariance is {cov.sigma.shape}"
            )
        xi.setflags(write=False)
        object.__setattr__(self, "first_moments", xi)

    @classmethod
    def vacuum(cls, n_modes: int = 1) -> "GaussianState":
        return cls(np.zeros(2 * n_modes), CovarianceMatrix(np.eye(2 * n_modes)))

    @classmethod
    def thermal(cls, nus) -> "GaussianState":
        nus = np.atleast_1d(np.asarray(nus, dtype=float))
        return cls(np.zeros(2 * nus.size), CovarianceMatrix(np.diag(np.repeat(nus, 2))))


@dataclass(frozen=True)
class QuadraticGenerator:
    """Hamiltonian ``H = 1/2 X^T F X + alpha^T X``."""

    F: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        F = _as_square(self.F, "F")
        _check_symmetric(F, "F")
        alpha = np.array(self.alpha, dtype=float).reshape(-1)
        if alpha.shape[0] != F.shape[0]:
            raise ValidationError("alpha length does not match F")
        F.setflags(write=False)
        alpha.setflags(write=False)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "alpha", alpha)

    @property
    def n_modes(self) -> int:
        return self.F.shape[0] // 2


def _coerce_cov(cov) -> np.ndarray:
    if isinstance(cov, CovarianceMatrix):
        return cov.sigma
    s = _as_square(cov, "covariance")
    _check_symmetric(s, "covariance")
    return 0.5 * (s + s.T)


def _check_positive_definite(s: np.ndarray) -> None:
    eig = np.linalg.eigvalsh(s)
    if eig[0] <= 0.0:
        raise DomainError(
            f"covariance is not positive definite: smallest eigenvalue {eig[0]:.6e}"
        )


def symplectic_spectrum(cov) -> np.ndarray:
    """Williamson symplectic eigenvalues, descending.

    Computed from the eigenvalues of ``i J sigma`` which come in pairs
    ``+nu, -nu``.
    """
    s = _coerce_cov(cov)
    _check_positive_definite(s)
    n = s.shape[0] // 2
    J = inverse_symplectic_form(n)
    ev = np.linalg.eigvals(1j * J @ s)
    nus = np.sort(np.abs(ev.real))[::-1]
    # each nu appears twice
    return 0.5 * (nus[0::2] + nus[1::2])


def williamson(cov) -> tuple[np.ndarray, np.ndarray]:
    """Williamson decomposition.

    Returns ``(nus, S)`` with ``S @ Omega @ S.T == Omega`` and
    ``S @ sigma @ S.T == diag(nu1, nu1, ..., nun, nun)``, ``nus`` descending.
    """
    s = _coerce_cov(cov)
    _check_positive_definite(s)
    n = s.shape[0] // 2
    J = inverse_symplectic_form(n)
    root = np.real(sqrtm(s))
    root = 0.5 * (root + root.T)
    inv_root = np.linalg.inv(root)
    A = inv_root @ J @ inv_root
    A = 0.5 * (A - A.T)
    T, O = schur(A, output="real")
    kappas = np.empty(n)
    O = O.copy()
    for i in range(n):
        a, b = 2 * i, 2 * i + 1
        upper = T[a, b]
        if upper < 0:
            O[:, [a, b]] = O[:, [b, a]]
            upper = -upper
        kappas[i] = 0.5 * (abs(T[a, b]) + abs(T[b, a]))
    nus = 1.0 / kappas
    order = np.argsort(-nus, kind="stable")
    perm = np.concatenate([[2 * i, 2 * i + 1] for i in order])
    O = O[:, perm]
    nus = nus[order]
    D_half = np.diag(np.repeat(np.sqrt(nus), 2))
    S = D_half @ O.T @ inv_root
    return nus, S


def mode_nu(vv: float, ww: float, vw_sym: float = 0.0) -> float:
    """Symplectic eigenvalue of one mode from its covariance entries.

    ``vv`` and ``ww`` are the diagonal covariance entries and ``vw_sym`` the
    symmetrized cross term, so ``nu = sqrt(vv * ww - vw_sym**2)``.
    """
    if vv <= 0 or ww <= 0:
        raise DomainError(f"second moments must be positive, got vv={vv}, ww={ww}")
    det = vv * ww - vw_sym**2
    if det < 0:
        raise DomainError(f"unphysical moments: vv*ww - vw^2 = {det:.6e} < 0")
    return float(np.sqrt(det))


def purity_from_spectrum(nus, atol: float = PHYSICAL_ATOL) -> float:
    """Purity ``prod(1/nu_i)`` of a Gaussian state."""
    nus = np.atleast_1d(np.asarray(nus, dtype=float))
    if nus.size == 0:
        raise ValidationError("empty symplectic spectrum")
    bad = nus[nus < 1.0 - atol]
    if bad.size:
        raise DomainError(f"symplectic eigenvalue {bad.min():.12g} violates nu >= 1")
    return float(np.prod(1.0 / nus))


def _phi1(A: np.ndarray, t: float) -> np.ndarray:
    """``(exp(A t) - 1) A^{-1}`` without inverting ``A``."""
    dim = A.shape[0]
    At = A * t
    if np.linalg.norm(At, 2) < 1e-4:
        # t * sum_k (A t)^k / (k+1)!
        term = np.eye(dim)
        acc = np.eye(dim)
        for k in range(1, 8):
            term = term @ At / (k + 1)
            acc = acc + term
        return t * acc
    if np.linalg.cond(A) < 1e8:
        return np.linalg.solve(A.T, (expm(At) - np.eye(dim)).T).T
    # singular generator: augmented exponential
    aug = np.zeros((2 * dim, 2 * dim))
    aug[:dim, :dim] = A
    aug[:dim, dim:] = np.eye(dim)
    return expm(aug * t)[:dim, dim:]


def evolve(gen: QuadraticGenerator, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Heisenberg-picture affine map ``X(t) = S X + d`` for a quadratic Hamiltonian."""
    if not np.isfinite(t):
        raise ValidationError(f"time must be finite, got {t}")
    J = inverse_symplectic_form(gen.n_modes)
    A = J @ gen.F
    S = expm(A * t)
    d = _phi1(A, t) @ (J @ gen.alpha)
    return S, d


def is_symplectic(S, rtol: float = SYMPLECTIC_RTOL) -> bool:
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
        return False
    Om = symplectic_form(S.shape[0] // 2)
    scale = max(1.0, np.linalg.norm(S, 2) ** 2)
    return bool(np.max(np.abs(S @ Om @ S.T - Om)) <= rtol * scale)


def transform_state(state: GaussianState, S, d=None) -> GaussianState:
    S = np.asarray(S, dtype=float)
    dim = state.covariance.sigma.shape[0]
    if S.shape != (dim, dim):
        raise ValidationError(f"S has shape {S.shape}, expected {(dim, dim)}")
    if not is_symplectic(S):
        raise ValidationError("transformation matrix is not symplectic")
    d = np.zeros(dim) if d is None else np.asarray(d, dtype=float)
    sigma = S @ state.covariance.sigma @ S.T
    return GaussianState(S @ state.first_moments + d, CovarianceMatrix(0.5 * (sigma + sigma.T)))


def wigner(state: GaussianState, point) -> float:
    """Gaussian Wigner function ``exp(-dx^T sigma^{-1} dx) / (pi^n sqrt(det sigma))``."""
    s = state.covariance.sigma
    n = s.shape[0] // 2
    dx = np.asarray(point, dtype=float).reshape(-1) - state.first_moments
    if dx.shape[0] != s.shape[0]:
        raise ValidationError("phase-space point has the wrong dimension")
    sign, logdet = np.linalg.slogdet(s)
    if sign <= 0 or not np.isfinite(logdet) or np.linalg.cond(s) > 1e14:
        raise DomainError("covariance matrix is singular")
    quad = dx @ np.linalg.solve(s, dx)
    return float(np.exp(-quad - 0.5 * logdet) / np.pi**n)
