"""Truncated Fock-space reference for harvesting in a 1+1D Dirichlet cavity.

A brute-force second-order Dyson calculation that shares no code path with
:mod:`localpurity.harvesting`: the field is a finite set of cavity modes in a
Fock space with at most two quanta, the detectors are explicit two- or
three-level systems, spatial overlaps come from numerical quadrature and the
time-ordered integrals are done on a uniform grid (trapezoid rule with one
Richardson step).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import sparse
from scipy.integrate import quad

from .errors import ValidationError

SCHEMA = 1


@dataclass(frozen=True)
class OracleSetup:
    """Benchmark geometry in units of the smearing width ``sigma``."""

    cavity_length: float = 20.0
    separation: float = 5.0
    sigma: float = 1.0
    gap: float = 1.0
    switch_width: float = 1.0
    n_modes: int = 40
    coupling: float = 1.0
    time_span: float = 9.0
    steps: int = 1600

    def __post_init__(self):
        if self.separation >= self.cavity_length:
            raise ValidationError("detectors must fit inside the cavity")
        if self.n_modes < 1 or self.steps < 8:
            raise ValidationError("need at least one mode and eight time steps")

    @property
    def positions(self) -> tuple[float, float]:
        mid = 0.5 * self.cavity_length
        return mid - 0.5 * self.separation, mid + 0.5 * self.separation


def _fock_basis(n_modes: int):
    """States with at most two quanta: vacuum, ``|j>`` and ``|j k>`` with ``j <= k``."""
    states = [()]
    states += [(j,) for j in range(n_modes)]
    states += [(j, k) for j in range(n_modes) for k in range(j, n_modes)]
    return states, {s: i for i, s in enumerate(states)}


def _creation_ops(n_modes: int):
    states, index = _fock_basis(n_modes)
    ops = []
    for j in range(n_modes):
        rows, cols, vals = [], [], []
        for col, s in enumerate(states):
            if len(s) == 2:
                continue
            new = tuple(sorted(s + (j,)))
            rows.append(index[new])
            cols.append(col)
            vals.append(math.sqrt(new.count(j)))
        ops.append(sparse.csr_matrix((vals, (rows, cols)), shape=(len(states), len(states))))
    return states, ops


def _overlaps(setup: OracleSetup) -> np.ndarray:
    """``int G_sigma(x - x_i) sqrt(2/L) sin(k_j x) dx`` over the cavity."""
    L = setup.cavity_length
    out = np.zeros((2, setup.n_modes))
    for i, xc in enumerate(setup.positions):
        for j in range(setup.n_modes):
            k = (j + 1) * math.pi / L

            def f(x, xc=xc, k=k):
                g = math.exp(-0.5 * ((x - xc) / setup.sigma) ** 2) / (math.sqrt(2 * math.pi) * setup.sigma)
                return g * math.sqrt(2.0 / L) * math.sin(k * x)

            out[i, j] = quad(f, 0.0, L, points=[xc], limit=400, epsabs=1e-14, epsrel=1e-12)[0]
    return out


def _detector_ops(kind: str):
    levels = 2 if kind == "qubit" else 3
    mu = np.zeros((levels, levels))
    for n in range(levels - 1):
        # qubit: sigma_x; oscillator: a + a^dag truncated at two quanta
        mu[n + 1, n] = mu[n, n + 1] = 1.0 if kind == "qubit" else math.sqrt(n + 1)
    return levels, mu


def _dyson(setup: OracleSetup, kind: str, steps: int) -> dict:
    n = setup.n_modes
    states, creators = _creation_ops(n)
    dim_f = len(states)
    omegas = (np.arange(1, n + 1) * math.pi / setup.cavity_length)
    field_energy = np.array([sum(omegas[j] for j in s) for s in states])
    over = _overlaps(setup)
    levels, mu = _detector_ops(kind)
    eye_d = np.eye(levels)
    det_energy = np.arange(levels) * setup.gap
    energy = (det_energy[:, None, None] + det_energy[None, :, None] + field_energy[None, None, :]).ravel()
    mu_a = np.kron(mu, eye_d)
    mu_b = np.kron(eye_d, mu)
    V = []
    for i, mu_i in enumerate((mu_a, mu_b)):
        phi = sparse.csr_matrix((dim_f, dim_f))
        for j in range(n):
            c = over[i, j] / math.sqrt(2.0 * omegas[j])
            phi = phi + c * (creators[j] + creators[j].T)
        V.append(sparse.kron(sparse.csr_matrix(mu_i), phi, format="csr"))
    dim = levels * levels * dim_f
    psi0 = np.zeros(dim, dtype=complex)
    psi0[0] = 1.0

    t = np.linspace(-setup.time_span, setup.time_span, steps + 1)
    dt = t[1] - t[0]
    chi = np.exp(-0.5 * (t / setup.switch_width) ** 2) / (math.sqrt(2 * math.pi) * setup.switch_width)
    lam = setup.coupling

    def h_apply(k, vec):
        ph = np.exp(-1j * energy * t[k])
        inner = ph * vec
        out = lam * chi[k] * (V[0] @ inner + V[1] @ inner)
        return np.conj(ph) * out

    first = [h_apply(k, psi0) for k in range(len(t))]
    w = np.full(len(t), dt)
    w[0] = w[-1] = 0.5 * dt
    psi1 = -1j * sum(wk * fk for wk, fk in zip(w, first))
    # cumulative trapezoid for the inner time-ordered integral
    inner = np.zeros(dim, dtype=complex)
    psi2 = np.zeros(dim, dtype=complex)
    for k in range(len(t)):
        if k > 0:
            inner = inner + 0.5 * dt * (first[k - 1] + first[k])
        psi2 += w[k] * h_apply(k, inner)
    psi2 = -psi2

    amp1 = psi1.reshape(levels, levels, dim_f)
    amp2 = psi2.reshape(levels, levels, dim_f)
    # rho(e_i, e_j) = sum_f amp_i conj(amp_j) = L_ji
    e_a = amp1[1, 0, :]
    e_b = amp1[0, 1, :]
    L = np.array([[np.vdot(e_a, e_a), np.vdot(e_a, e_b)], [np.vdot(e_b, e_a), np.vdot(e_b, e_b)]])
    out = {
        "L_AA": float(L[0, 0].real),
        "L_BB": float(L[1, 1].real),
        "L_AB": complex(L[0, 1]),
        "M": complex(amp2[1, 1, 0]),
    }
    if kind == "oscillator":
        out["K_A"] = complex(amp2[2, 0, 0])
        out["K_B"] = complex(amp2[0, 2, 0])
    return out


def run_oracle(setup: OracleSetup = OracleSetup(), kinds=("qubit", "oscillator")) -> dict:
    """Second-order elements with Richardson extrapolation in the time step."""
    results = {}
    for kind in kinds:
        coarse = _dyson(setup, kind, setup.steps)
        fine = _dyson(setup, kind, 2 * setup.steps)
        merged = {}
        for key in fine:
            val = (4.0 * fine[key] - coarse[key]) / 3.0
            merged[key] = val
        results[kind] = merged
    return {"schema": SCHEMA, "setup": asdict(setup), "results": _jsonable(results)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def write_golden(path, setup: OracleSetup = OracleSetup()) -> dict:
    data = run_oracle(setup)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return data


def load_golden(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("schema") != SCHEMA:
        raise ValidationError(f"unsupported oracle schema {data.get('schema')!r}")
    return data
