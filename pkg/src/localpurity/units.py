"""Unit conversions between SI-style inputs and the natural units used internally.

Internally ``hbar = c = k_B = 1`` and everything is a dimensionless ratio.
The constants below are pinned (CODATA 2018 exact SI values) so results do
not change with the installed scipy version.
"""
from __future__ import annotations

import math

from .errors import ValidationError

CONSTANTS = {
    "hbar_J_s": 1.054571817e-34,
    "c_m_per_s": 299792458.0,
    "k_B_J_per_K": 1.380649e-23,
    "e_C": 1.602176634e-19,
}

K_B_EV_PER_K = CONSTANTS["k_B_J_per_K"] / CONSTANTS["e_C"]
HBAR_C_EV_M = CONSTANTS["hbar_J_s"] * CONSTANTS["c_m_per_s"] / CONSTANTS["e_C"]


def _positive(value: float, name: str) -> float:
    value = float(value)
    if not value > 0 or not math.isfinite(value):
        raise ValidationError(f"{name} must be positive and finite, got {value}")
    return value


def kelvin_to_ev(temperature_k: float) -> float:
    """Thermal energy ``k_B T`` in eV."""
    return _positive(temperature_k, "temperature") * K_B_EV_PER_K


def ev_to_kelvin(energy_ev: float) -> float:
    return _positive(energy_ev, "energy") / K_B_EV_PER_K


def pm_to_inverse_ev(length_pm: float) -> float:
    """Length in picometres expressed in units of ``hbar c / eV``."""
    return _positive(length_pm, "length") * 1e-12 / HBAR_C_EV_M


def inverse_ev_to_pm(length: float) -> float:
    return _positive(length, "length") * HBAR_C_EV_M / 1e-12


def size_mass_ratio(length_pm: float, mass_ev: float) -> float:
    """``ell M c / hbar`` for a region of size ``length_pm`` and a field of mass ``mass_ev``."""
    return pm_to_inverse_ev(length_pm) * _positive(mass_ev, "mass")


def temperature_mass_ratio(temperature_k: float, mass_ev: float) -> float:
    """``k_B T / (M c^2)``."""
    return kelvin_to_ev(temperature_k) / _positive(mass_ev, "mass")


def temperature_for_boltzmann(gap_ev: float, z: float) -> float:
    """Temperature in kelvin at which a gap ``gap_ev`` has Boltzmann factor ``z``."""
    if not 0.0 < z < 1.0:
        raise ValidationError(f"z must lie in (0, 1), got {z}")
    return ev_to_kelvin(_positive(gap_ev, "gap") / -math.log(z))


def boltzmann_for_temperature(gap_ev: float, temperature_k: float) -> float:
    return math.exp(-_positive(gap_ev, "gap") / kelvin_to_ev(temperature_k))
