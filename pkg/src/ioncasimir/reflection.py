"""Reflection and transmission amplitudes on the imaginary frequency axis.

An interface separates the electrolyte (medium 3, with transverse ``p``/``s``
waves and a longitudinal ``l`` wave) from a local medium ``j`` (the metal,
``j = 2``, or silica, ``j = 1``). Unprimed amplitudes describe waves incident
from the electrolyte, primed ones waves incident from medium ``j``.

Every z-component ``k_a`` is continued as ``k_a -> i kappa_a`` and every
amplitude is real. Basis conventions: for ``p`` waves the incident field is
``(k_z, -k)/K`` and the reflected field ``-(k_z, k)/K``; ``l`` waves carry the
normalization ``K_out/K_l`` times ``i``. Only the products entering round
trips (``r_pl r_lp`` and ``t r' t'``) are convention independent.
"""
from dataclasses import dataclass

import numpy as np

from .quantities import CONSTANTS

__all__ = [
    "EXP_GUARD",
    "ReflectionError",
    "InterfaceAmplitudes",
    "ReflectionBlock",
    "guarded_exp",
    "fresnel_local",
    "interface_amplitudes",
    "slab_block",
    "half_space_block",
    "zero_freq_silica",
    "zero_freq_metal",
    "zero_freq_metal_local",
]

#: Factors ``exp(-x)`` with ``x`` above this are set to exactly zero.
EXP_GUARD = 700.0


class ReflectionError(ArithmeticError):
    """An amplitude denominator vanished or a slab series diverged."""


def guarded_exp(x):
    """``exp(-x)`` with ``exp(-x) = 0`` for ``x > EXP_GUARD``."""
    x = np.asarray(x, dtype=float)
    out = np.exp(-np.minimum(x, EXP_GUARD))
    out[x > EXP_GUARD] = 0.0
    return out


@dataclass(frozen=True)
class InterfaceAmplitudes:
    """Amplitudes of one electrolyte / local-medium interface (arrays over k)."""

    r_pp: np.ndarray
    r_lp: np.ndarray
    t_pp: np.ndarray
    r_ll: np.ndarray
    r_pl: np.ndarray
    t_pl: np.ndarray
    r_pp_prime: np.ndarray
    t_lp_prime: np.ndarray
    t_pp_prime: np.ndarray
    r_ss: np.ndarray
    r_ss_prime: np.ndarray


@dataclass(frozen=True)
class ReflectionBlock:
    """Content of one body's block-diagonal 3x3 reflection matrix.

    ``s`` is decoupled; ``rlp`` converts incident ``p`` into reflected ``l``
    and ``rpl`` the reverse.
    """

    rss: np.ndarray
    rpp: np.ndarray
    rpl: np.ndarray
    rlp: np.ndarray
    rll: np.ndarray

    def matrix(self):
        """Stack into arrays of shape ``(..., 3, 3)`` in the order (s, p, l)."""
        z = np.zeros_like(np.asarray(self.rpp, dtype=float) + 0 * np.asarray(self.rss, dtype=float))
        b = lambda a: np.broadcast_to(a, z.shape)
        return np.stack(
            [
                np.stack([b(self.rss), z, z], axis=-1),
                np.stack([z, b(self.rpp), b(self.rpl)], axis=-1),
                np.stack([z, b(self.rlp), b(self.rll)], axis=-1),
            ],
            axis=-2,
        )


def fresnel_local(eps_a, eps_b, kappa_a, kappa_b, q2=None):
    """Local Fresnel amplitudes for a wave in medium ``a`` hitting medium ``b``.

    Parameters
    ----------
    eps_a, eps_b : float
        Permittivities at the imaginary frequency.
    kappa_a, kappa_b : ndarray
        Decay constants ``sqrt(k^2 + eps xi^2/c^2)``.
    q2 : float, optional
        ``(xi/c)^2``; when given, ``r_ss`` uses the cancellation-free form
        ``(eps_a - eps_b) q2/(kappa_a + kappa_b)^2``.

    Returns
    -------
    r_ss, r_pp : ndarray
        ``r_pp = (eps_b kappa_a - eps_a kappa_b)/(eps_b kappa_a + eps_a kappa_b)``.
    """
    if q2 is None:
        rs = (kappa_a - kappa_b) / (kappa_a + kappa_b)
    else:
        rs = (eps_a - eps_b) * q2 / (kappa_a + kappa_b) ** 2
    rp = (eps_b * kappa_a - eps_a * kappa_b) / (eps_b * kappa_a + eps_a * kappa_b)
    return rs, rp


def _interface(k, eps_j, kappa_j, K_j, eps3, eps_b, kappa3, K3, kl, Kl, q2, ions=True):
    k = np.asarray(k, dtype=float)
    X = eps_j / eps_b * (eps3 - eps_b)
    a = eps_j * kappa3
    b = eps3 * kappa_j
    c = k * k / kl * X
    den = a + b + c
    if np.any(den == 0.0) or not np.all(np.isfinite(den)):
        raise ReflectionError("vanishing interface denominator")
    r_ss = (eps3 - eps_j) * q2 / (kappa3 + kappa_j) ** 2
    zero = np.zeros_like(den)
    if ions:
        r_pl = 2.0 * k * eps_j * K3 / (Kl * den)
        t_pl = 2.0 * k * eps_j * K3 * K3 / (K_j * Kl * den)
        r_ll = (a + b - c) / den
    else:
        # no longitudinal mode exists without ions
        r_pl, t_pl, r_ll = zero, zero, zero
    return InterfaceAmplitudes(
        r_pp=(a - b - c) / den,
        r_lp=-2.0 * k * X * kappa3 * Kl / (kl * K3 * den),
        t_pp=2.0 * a * K3 / (K_j * den),
        r_ll=r_ll,
        r_pl=r_pl,
        t_pl=t_pl,
        r_pp_prime=(b - a - c) / den,
        t_lp_prime=-2.0 * k * X * b * K_j * Kl / (eps_j * kl * K3 * K3 * den),
        t_pp_prime=2.0 * b * K_j / (K3 * den),
        r_ss=r_ss,
        r_ss_prime=-r_ss,
    )


def interface_amplitudes(gap, kin, medium="slab"):
    """Amplitudes of the electrolyte interface with the slab or the half-space.

    Parameters
    ----------
    gap : ElectrolyteGap
    kin : WaveKinematics
        Kinematics at ``xi > 0``.
    medium : {"slab", "half_space"}
        Which local medium borders the electrolyte.

    Returns
    -------
    InterfaceAmplitudes
    """
    if kin.xi <= 0:
        raise ValueError("interface amplitudes need xi > 0; use the zero-frequency closed forms")
    if medium == "slab":
        eps_j, kappa_j, K_j = kin.eps2, kin.kappa2, kin.K2
    elif medium == "half_space":
        eps_j, kappa_j, K_j = kin.eps1, kin.kappa1, kin.K1
    else:
        raise ValueError(f"medium must be 'slab' or 'half_space', got {medium!r}")
    q2 = (kin.xi / CONSTANTS.c) ** 2
    return _interface(
        kin.k, eps_j, kappa_j, K_j, kin.eps3, kin.eps_b, kin.kappa3, kin.K3,
        kin.kappa_ell, kin.Kell, q2, ions=gap.has_ions,
    )


def half_space_block(gap, kin):
    """Reflection block of the silica half-space, seen from the electrolyte."""
    a = interface_amplitudes(gap, kin, "half_space")
    return ReflectionBlock(a.r_ss, a.r_pp, a.r_pl, a.r_lp, a.r_ll)


def slab_block(gap, kin, d):
    """Reflection block of a metal slab of thickness ``d`` (m) in the electrolyte.

    Sums the multiple reflections inside the slab,
    ``r2_ab = r_ab + t_pb r'_pp t'_ap E/(1 - r'_pp^2 E)`` with
    ``E = exp(-2 kappa_2 d)``; the ``s`` channel uses the same series.
    """
    if not d > 0:
        raise ValueError("slab thickness must be positive")
    a = interface_amplitudes(gap, kin, "slab")
    E = guarded_exp(2.0 * kin.kappa2 * d)
    rp = a.r_pp_prime
    if np.any(np.abs(rp * rp * E) >= 1.0):
        raise ReflectionError("slab multiple-reflection series does not converge")
    g = rp * E / (1.0 - rp * rp * E)
    rs = a.r_ss
    return ReflectionBlock(
        rss=rs * (1.0 - E) / (1.0 - rs * rs * E),
        rpp=a.r_pp + a.t_pp * a.t_pp_prime * g,
        rpl=a.r_pl + a.t_pl * a.t_pp_prime * g,
        rlp=a.r_lp + a.t_pp * a.t_lp_prime * g,
        rll=a.r_ll + a.t_pl * a.t_lp_prime * g,
    )


def zero_freq_silica(eps1_static, eps_b0, gap, k):
    """Zero-frequency silica amplitudes ``(r1_pp(0), r1_ll(0))``.

    With ions ``r1_pp(0) = -1`` and
    ``r1_ll(0) = (1 - (k/kappa_l) eps_1(0)/eps_b0)/(1 + (k/kappa_l) eps_1(0)/eps_b0)``
    with ``kappa_l = sqrt(k^2 + 1/lambda_D^2)``. Without ions the local value
    ``(eps_1(0) - eps_b0)/(eps_1(0) + eps_b0)`` and no longitudinal channel.
    """
    k = np.asarray(k, dtype=float)
    if not gap.has_ions:
        r = (eps1_static - eps_b0) / (eps1_static + eps_b0)
        return np.full_like(k, r), np.zeros_like(k)
    kl = np.sqrt(k * k + 1.0 / gap.debye_length**2)
    x = k / kl * (eps1_static / eps_b0)
    return np.full_like(k, -1.0), (1.0 - x) / (1.0 + x)


def _require_metal(metal):
    if not metal.is_metallic:
        raise ValueError(f"{metal.name} is not metallic: zero-frequency limits need a Drude term")
    return metal.drude


def zero_freq_metal(gap, metal, k):
    """Zero-frequency metal amplitudes ``(r2_pp(0), r2_ll(0))``, independent of ``d``.

    Both equal -1 whenever ions are present, for any Drude relaxation rate
    (including the plasma model). Without ions the electrolyte is local and
    the TM value is :func:`zero_freq_metal_local`.
    """
    _require_metal(metal)
    k = np.asarray(k, dtype=float)
    if not gap.has_ions:
        return np.full_like(k, zero_freq_metal_local(gap, metal)), np.zeros_like(k)
    return np.full_like(k, -1.0), np.full_like(k, -1.0)


def zero_freq_metal_local(gap, metal):
    """Zero-frequency TM amplitude of the metal when the ionic response is local.

    The local Fresnel coefficient tends to ``(1 - rho)/(1 + rho)`` with
    ``rho = (w_p3/w_p2)^2 (gamma_2/gamma_3)``, i.e. ``1 - 2 rho`` to first
    order; exactly 1 without ions.
    """
    drude = _require_metal(metal)
    if not gap.has_ions or drude.gamma == 0.0:
        return 1.0
    if gap.gamma_ions == 0.0:
        return -1.0
    rho = (gap.omega_p3 / drude.omega_p) ** 2 * (drude.gamma / gap.gamma_ions)
    return (1.0 - rho) / (1.0 + rho)
