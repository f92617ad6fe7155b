"""Physical constants, unit conversions and the Matsubara frequency grid.

All quantities are SI: rad/s, metres, joules, energies per unit area in J/m².
"""
from dataclasses import dataclass

import numpy as np
from scipy import constants as _sc

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "DEFAULT_TEMPERATURE",
    "MatsubaraFrequency",
    "check_temperature",
    "ev_to_angular",
    "angular_to_ev",
    "matsubara",
    "matsubara_xi1",
    "thermal_energy",
]


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA constants as shipped by ``scipy.constants``."""

    hbar: float = _sc.hbar
    c: float = _sc.c
    kB: float = _sc.k
    e_charge: float = _sc.e
    eps0: float = _sc.epsilon_0
    atomic_mass_unit: float = _sc.atomic_mass


CONSTANTS = PhysicalConstants()

_XI_PER_KELVIN = 2.0 * np.pi * CONSTANTS.kB / CONSTANTS.hbar

#: Room temperature, used whenever a run does not set one (K).
DEFAULT_TEMPERATURE = 300.0


@dataclass(frozen=True)
class MatsubaraFrequency:
    """Matsubara index ``n`` and its angular frequency ``xi`` (rad/s)."""

    n: int
    xi: float


def check_temperature(T):
    """Return ``T`` as a float after checking it is a positive temperature in K."""
    T = float(T)
    if not np.isfinite(T) or T <= 0.0:
        raise ValueError(f"temperature must be positive and finite, got {T!r} K")
    return T


def ev_to_angular(value_ev):
    """Convert an energy in eV to an angular frequency in rad/s.

    Parameters
    ----------
    value_ev : float or array_like
        Non-negative energy in eV.

    Returns
    -------
    float or ndarray
        ``value_ev * e / hbar``.
    """
    v = np.asarray(value_ev, dtype=float)
    if np.any(v < 0.0) or np.any(np.isnan(v)):
        raise ValueError("energy in eV must be non-negative")
    out = v * CONSTANTS.e_charge / CONSTANTS.hbar
    return float(out) if out.ndim == 0 else out


def angular_to_ev(omega):
    """Inverse of :func:`ev_to_angular`."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0.0) or np.any(np.isnan(w)):
        raise ValueError("angular frequency must be non-negative")
    out = w * CONSTANTS.hbar / CONSTANTS.e_charge
    return float(out) if out.ndim == 0 else out


def matsubara_xi1(T=DEFAULT_TEMPERATURE):
    """First Matsubara frequency 2π kB T/ħ in rad/s."""
    return check_temperature(T) * _XI_PER_KELVIN


def matsubara(n, T=DEFAULT_TEMPERATURE):
    """Matsubara frequency of order ``n`` at temperature ``T``.

    Parameters
    ----------
    n : int
        Non-negative index.
    T : float
        Temperature in K.

    Returns
    -------
    MatsubaraFrequency
    """
    if int(n) != n or n < 0:
        raise ValueError(f"Matsubara index must be a non-negative integer, got {n!r}")
    n = int(n)
    T = check_temperature(T)
    # n * xi1 keeps xi_n an exact integer multiple of xi_1
    return MatsubaraFrequency(n, n * (T * _XI_PER_KELVIN))


def thermal_energy(T=DEFAULT_TEMPERATURE):
    """kB T in J."""
    return CONSTANTS.kB * check_temperature(T)
