"""Nonlocal dielectric response of salted water.

The ions add a Drude term to the transverse permittivity and a
wavevector-dependent longitudinal permittivity

    eps_l(i xi, K) = eps_b(i xi) + w_p3^2 / (xi (xi + gamma_3) + v_th^2 K^2),

with ``v_th = sqrt(kB T/m)`` and ``w_p3 = sqrt(eps_b0) v_th / lambda_D``. The
longitudinal mode in the gap decays with ``kappa_l``, the root of
``eps_l(i xi, K) = 0`` at ``K^2 = k^2 - kappa_l^2``.

Scalar helpers use plain arithmetic so they also run on ``mpmath.mpf``.
"""
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .materials import Material, eps_static, eval_material
from .quantities import CONSTANTS, DEFAULT_TEMPERATURE, check_temperature

__all__ = [
    "DEFAULT_GAMMA_IONS",
    "DEFAULT_ION_MASS",
    "ElectrolyteGap",
    "WaveKinematics",
    "debye_length_from_concentration",
    "concentration_from_debye_length",
    "ion_density_from_molarity",
    "eps_transverse",
    "eps_longitudinal",
    "eps_longitudinal_k2",
    "kappa_ell",
    "kinematics",
]

#: Ion relaxation rate (rad/s) used when a run does not set one.
DEFAULT_GAMMA_IONS = 1e12
#: Effective ion mass (kg), sodium scale.
DEFAULT_ION_MASS = 23.0 * CONSTANTS.atomic_mass_unit


@dataclass(frozen=True)
class ElectrolyteGap:
    """Salted water between the two bodies.

    Parameters
    ----------
    water : Material
        Dielectric function ``eps_b`` of pure water.
    debye_length : float
        Debye screening length in m; ``math.inf`` switches the ions off.
    gamma_ions : float
        Ion relaxation rate ``gamma_3`` in rad/s.
    ion_mass : float
        Effective ion mass in kg.
    temperature : float
        Temperature in K.
    """

    water: Material
    debye_length: float
    gamma_ions: float = DEFAULT_GAMMA_IONS
    ion_mass: float = DEFAULT_ION_MASS
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self):
        lam = float(self.debye_length)
        if not lam > 0.0 or math.isnan(lam):
            raise ValueError(f"Debye length must be positive, got {lam!r}")
        if not (self.ion_mass > 0.0 and math.isfinite(self.ion_mass)):
            raise ValueError("ion mass must be positive")
        if not (self.gamma_ions >= 0.0 and math.isfinite(self.gamma_ions)):
            raise ValueError("ion relaxation rate must be non-negative")
        object.__setattr__(self, "debye_length", lam)
        object.__setattr__(self, "gamma_ions", float(self.gamma_ions))
        object.__setattr__(self, "ion_mass", float(self.ion_mass))
        object.__setattr__(self, "temperature", check_temperature(self.temperature))

    @property
    def has_ions(self):
        return math.isfinite(self.debye_length)

    @cached_property
    def eps_b0(self):
        """Static permittivity of pure water."""
        return eps_static(self.water)

    @property
    def v_th(self):
        """Thermal ion velocity ``sqrt(kB T/m)`` in m/s."""
        return math.sqrt(CONSTANTS.kB * self.temperature / self.ion_mass)

    @property
    def omega_p3(self):
        """Ion plasma frequency in rad/s (0 without ions)."""
        if not self.has_ions:
            return 0.0
        return math.sqrt(self.eps_b0) * self.v_th / self.debye_length

    def eps_b(self, xi):
        return eval_material(self.water, xi)

    def without_ions(self):
        return ElectrolyteGap(self.water, math.inf, self.gamma_ions, self.ion_mass, self.temperature)


def debye_length_from_concentration(N, eps_b0, T=DEFAULT_TEMPERATURE):
    """Debye length ``sqrt(eps0 eps_b0 kB T/(N e^2))`` in m.

    Parameters
    ----------
    N : float
        Total number density of monovalent ions in m^-3.
    eps_b0 : float
        Static permittivity of the solvent.
    T : float
        Temperature in K.
    """
    if not N > 0.0:
        raise ValueError(f"ion density must be positive, got {N!r}")
    T = check_temperature(T)
    c = CONSTANTS
    return math.sqrt(c.eps0 * eps_b0 * c.kB * T / (N * c.e_charge**2))


def concentration_from_debye_length(debye_length, eps_b0, T=DEFAULT_TEMPERATURE):
    """Inverse of :func:`debye_length_from_concentration`: ion density in m^-3."""
    if not debye_length > 0.0:
        raise ValueError(f"Debye length must be positive, got {debye_length!r}")
    T = check_temperature(T)
    c = CONSTANTS
    return c.eps0 * eps_b0 * c.kB * T / (debye_length**2 * c.e_charge**2)


def ion_density_from_molarity(mol_per_litre):
    """Total ion density (m^-3) of a fully dissociated 1:1 salt."""
    if not mol_per_litre > 0.0:
        raise ValueError("salt concentration must be positive")
    from scipy.constants import Avogadro

    return 2.0 * mol_per_litre * 1e3 * Avogadro


def eps_transverse(gap, xi):
    """Transverse permittivity ``eps_b + w_p3^2/(xi (xi + gamma_3))`` of the electrolyte."""
    if np.any(np.less_equal(xi, 0)):
        raise ValueError("ionic Drude term diverges at zero frequency")
    x = xi if np.ndim(xi) == 0 else np.asarray(xi, dtype=float)
    return gap.eps_b(x) + gap.omega_p3**2 / (x * (x + gap.gamma_ions))


def eps_longitudinal_k2(gap, xi, K2, eps_b=None):
    """Longitudinal permittivity as a function of ``K^2`` (which may be negative).

    ``eps_b`` optionally supplies ``eps_b(i xi)`` so callers evaluate it once.
    """
    wp2 = gap.omega_p3**2
    if xi == 0:
        if wp2 != 0 and np.any(np.equal(K2, 0)):
            raise ValueError("longitudinal permittivity diverges at xi = 0, K = 0")
        eb = gap.eps_b0 if eps_b is None else eps_b
    else:
        eb = gap.eps_b(xi) if eps_b is None else eps_b
    if wp2 == 0:
        return eb
    v2 = gap.v_th**2
    return eb + wp2 / (xi * (xi + gap.gamma_ions) + v2 * K2)


def eps_longitudinal(gap, xi, K, eps_b=None):
    """Longitudinal permittivity ``eps_l(i xi, K)`` for a real wavevector magnitude ``K``."""
    return eps_longitudinal_k2(gap, xi, K * K, eps_b)


def kappa_ell(gap, xi, k, eps_b=None):
    """Decay constant of the longitudinal mode in the gap (1/m).

    ``kappa_l^2 = k^2 + [xi (xi + gamma_3) + w_p3^2/eps_b(i xi)]/v_th^2``; at
    ``xi = 0`` this is exactly ``sqrt(k^2 + 1/lambda_D^2)``.
    """
    if xi == 0:
        if not gap.has_ions:
            return k + 0 * k
        return (k * k + 1.0 / gap.debye_length**2) ** 0.5
    eb = gap.eps_b(xi) if eps_b is None else eps_b
    v2 = gap.v_th**2
    return (k * k + (xi * (xi + gap.gamma_ions) + gap.omega_p3**2 / eb) / v2) ** 0.5


@dataclass(frozen=True)
class WaveKinematics:
    """Permittivities and decay constants at one imaginary frequency.

    ``k`` may be an array; every derived field then has its shape. ``K3``,
    ``K2`` and ``K1`` are the imaginary-axis magnitudes ``sqrt(eps_i) xi/c``
    and ``Kell`` is ``sqrt(kappa_l^2 - k^2)``. At ``xi = 0`` the permittivity
    fields of Drude-divergent media are ``inf``.
    """

    xi: float
    k: np.ndarray
    eps1: float
    eps2: float
    eps3: float
    eps_b: float
    kappa1: np.ndarray
    kappa2: np.ndarray
    kappa3: np.ndarray
    kappa_ell: np.ndarray
    K1: float
    K2: float
    K3: float
    Kell: np.ndarray


def _static_or_inf(material):
    return math.inf if material.is_metallic else eps_static(material)


def kinematics(gap, half_space, slab, xi, k, ion_drude=True, eps=None):
    """Fill :class:`WaveKinematics` for the silica / electrolyte / metal stack.

    Parameters
    ----------
    gap : ElectrolyteGap
    half_space, slab : Material
        Media on either side of the gap (``eps_1`` and ``eps_2``).
    xi : float
        Imaginary frequency in rad/s, ``xi >= 0``.
    k : float or ndarray
        In-plane wavevector in 1/m.
    ion_drude : bool
        Keep the ionic Drude term in ``eps_3``; when False ``eps_3 = eps_b``.
    eps : tuple, optional
        Precomputed ``(eps1, eps2, eps_b)`` at ``xi``.
    """
    if xi < 0:
        raise ValueError("imaginary frequency must be non-negative")
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("in-plane wavevector must be non-negative")
    if xi == 0:
        e1, e2, eb = _static_or_inf(half_space), _static_or_inf(slab), gap.eps_b0
        e3 = math.inf if (gap.has_ions and ion_drude) else eb
        kl = kappa_ell(gap, 0.0, k)
        return WaveKinematics(0.0, k, e1, e2, e3, eb, k, k, k, kl, 0.0, 0.0, 0.0, np.sqrt(kl * kl - k * k))
    if eps is None:
        e1, e2, eb = eval_material(half_space, xi), eval_material(slab, xi), gap.eps_b(xi)
    else:
        e1, e2, eb = eps
    e3 = eb + gap.omega_p3**2 / (xi * (xi + gap.gamma_ions)) if ion_drude else eb
    q = xi / CONSTANTS.c
    k2 = k * k
    kl2 = (xi * (xi + gap.gamma_ions) + gap.omega_p3**2 / eb) / gap.v_th**2
    return WaveKinematics(
        xi=float(xi),
        k=k,
        eps1=e1,
        eps2=e2,
        eps3=e3,
        eps_b=eb,
        kappa1=np.sqrt(k2 + e1 * q * q),
        kappa2=np.sqrt(k2 + e2 * q * q),
        kappa3=np.sqrt(k2 + e3 * q * q),
        kappa_ell=np.sqrt(k2 + kl2),
        K1=math.sqrt(e1) * q,
        K2=math.sqrt(e2) * q,
        K3=math.sqrt(e3) * q,
        Kell=np.full_like(k, math.sqrt(kl2)),
    )
