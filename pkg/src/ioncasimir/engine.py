"""Matsubara-summed Casimir free energy of a silica / electrolyte / metal-slab stack.

The free energy per unit area is ``F = F0_TM + F0_long + 2 sum_{n>=1} F_n``:

* ``F_n`` (n >= 1) uses local Fresnel coefficients with ``eps_3 = eps_b``; the
  ionic Drude term and the longitudinal channel are negligible there;
* ``F0_TM = -kB T Li3(r1 r2)/(16 pi L^2)``, equal to ``-kB T zeta(3)/(16 pi L^2)``
  when ions are present, since then both TM reflections are -1;
* ``F0_long`` is the screened, repulsive contribution of the longitudinal mode.

Integrals over the in-plane wavevector are written in ``u = 2 kappa_3 L``
(``v = 2 kappa_l L`` for the longitudinal term), where every integrand decays
like ``exp(-u)``, and integrated over 40 e-folds.
"""
import math
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from typing import Tuple

import mpmath
import numpy as np
from scipy.special import zeta

from . import kernels
from .electrolyte import ElectrolyteGap, kinematics
from .materials import Material, eps_static, eval_material
from .quadrature import ConvergenceError, integrate_rows
from .quantities import CONSTANTS, matsubara_xi1
from .reflection import (
    guarded_exp,
    half_space_block,
    slab_block,
    zero_freq_metal,
    zero_freq_metal_local,
    zero_freq_silica,
)

__all__ = [
    "ZETA3",
    "HAMAKER_SELECTORS",
    "LayerStack",
    "QuadratureSpec",
    "EnergyBreakdown",
    "prefactor",
    "matsubara_cap",
    "free_energy_n",
    "free_energy_terms",
    "free_energy_zero_tm",
    "free_energy_zero_tm_quadrature",
    "free_energy_zero_long",
    "total_free_energy",
    "hamaker",
    "hamaker_from_energy",
    "roundtrip_logdet",
    "logdet_at_xi",
    "logdet_roundtrip",
    "logdet_zero_sequence",
]

ZETA3 = float(zeta(3.0))
WINDOW = 40.0
# panels cluster near the window start, where integrands vary on the scale u_min
GRADING = 2.0
HAMAKER_SELECTORS = ("total", "total_minus_f0tm", "zero_frequency_only")


@dataclass(frozen=True)
class LayerStack:
    """Half-space, electrolyte gap of width ``separation`` and slab of ``thickness``.

    ``local_gap`` replaces the nonlocal ionic response by the local Drude
    model at zero frequency (comparison mode).
    """

    half_space: Material
    gap: ElectrolyteGap
    separation: float
    slab: Material
    thickness: float
    local_gap: bool = False

    def __post_init__(self):
        for name in ("separation", "thickness"):
            v = float(getattr(self, name))
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
            object.__setattr__(self, name, v)

    @property
    def temperature(self):
        return self.gap.temperature

    def with_(self, **changes):
        """Copy with fields replaced; ``debye_length`` and ``temperature`` reach into the gap."""
        gap_changes = {k: changes.pop(k) for k in ("debye_length", "temperature", "gamma_ions", "ion_mass") if k in changes}
        if gap_changes:
            changes["gap"] = replace(changes.get("gap", self.gap), **gap_changes)
        return replace(self, **changes)


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances of the wavevector quadrature and the Matsubara truncation.

    ``abs_tol`` is in J/m²; ``max_subdivisions`` caps the panel count.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 0.0
    max_subdivisions: int = 1024
    matsubara_tail_tol: float = 1e-8

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-3):
            raise ValueError(f"rel_tol must lie in (0, 1e-3], got {self.rel_tol!r}")
        if not self.abs_tol >= 0.0:
            raise ValueError("abs_tol must be non-negative")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 16:
            raise ValueError("max_subdivisions must be an integer >= 16")
        if not self.matsubara_tail_tol > 0.0:
            raise ValueError("matsubara_tail_tol must be positive")


@dataclass
class EnergyBreakdown:
    """Free energies per unit area (J/m²) and the Hamaker function of one stack."""

    separation: float
    temperature: float
    debye_length: float
    f0_tm: float
    f0_long: float
    f_n: Tuple[Tuple[int, float], ...]
    total: float
    hamaker_over_kBT: float
    n_max_used: int
    diagnostics: dict = field(default_factory=dict)

    def hamaker(self, selector="total"):
        """Hamaker function of one of the energy combinations in ``HAMAKER_SELECTORS``."""
        if selector == "total":
            F = self.total
        elif selector == "total_minus_f0tm":
            F = self.total - self.f0_tm
        elif selector == "zero_frequency_only":
            F = self.f0_tm + self.f0_long
        else:
            raise ValueError(f"unknown selector {selector!r}; choose from {HAMAKER_SELECTORS}")
        return hamaker_from_energy(F, self.separation, self.temperature)

    def to_dict(self):
        d = asdict(self)
        d["f_n"] = [[n, v] for n, v in self.f_n]
        return d


def prefactor(L, T):
    """``kB T/(16 pi L^2)``, the scale of every ``u``-integral (J/m²)."""
    return CONSTANTS.kB * T / (16.0 * math.pi * L * L)


def hamaker_from_energy(F, L, T):
    """``H/(kB T) = -12 pi L^2 F/(kB T)``."""
    return -12.0 * math.pi * L * L * F / (CONSTANTS.kB * T)


def matsubara_cap(L, T):
    """Hard upper bound on the Matsubara index, ``ceil(20 c/(2 L xi_1))``."""
    return max(1, math.ceil(20.0 * CONSTANTS.c / (2.0 * L * matsubara_xi1(T))))


def _block_eps(material, xi):
    return np.asarray(eval_material(material, xi), dtype=float)


@lru_cache(maxsize=4096)
def _terms_cached(half_space, water, slab, L, d, T, spec, n_lo, n_hi):
    ns = np.arange(n_lo, n_hi + 1)
    xi = ns * matsubara_xi1(T)
    e1 = _block_eps(half_space, xi)
    e2 = _block_eps(slab, xi)
    e3 = _block_eps(water, xi)
    q = xi * L / CONSTANTS.c
    alpha = q * q
    u0 = 2.0 * np.sqrt(e3) * q
    P = prefactor(L, T)

    def f(rows, s):
        return kernels.lifshitz_local(s, u0[rows], alpha[rows], e1[rows], e2[rows], e3[rows], d / L)

    vals, errs, _ = integrate_rows(
        f, ns.size, WINDOW, GRADING, spec.rel_tol, spec.abs_tol / P, 8, spec.max_subdivisions,
        labels=[f"n={n}" for n in ns],
    )
    return tuple(P * vals), tuple(P * errs)


def free_energy_terms(stack, spec, n_lo, n_hi):
    """``F_n`` for ``n_lo <= n <= n_hi`` (J/m², each counted once) and their error estimates."""
    if n_lo < 1 or n_hi < n_lo:
        raise ValueError("need 1 <= n_lo <= n_hi")
    v, e = _terms_cached(stack.half_space, stack.gap.water, stack.slab, stack.separation,
                         stack.thickness, stack.temperature, spec, int(n_lo), int(n_hi))
    return np.array(v), np.array(e)


def free_energy_n(stack, spec, n):
    """Free energy ``F_n`` of Matsubara order ``n >= 1`` (J/m²).

    Local Fresnel coefficients for the silica half-space and the metal slab,
    TE plus TM, with ``eps_3 = eps_b(i xi_n)``.
    """
    if int(n) != n or n < 1:
        raise ValueError("free_energy_n needs an integer n >= 1")
    return float(free_energy_terms(stack, spec, n, n)[0][0])


def _zero_freq_product(stack, k=0.0):
    gap = stack.gap
    if stack.local_gap and gap.has_ions:
        r1 = -1.0
        r2 = zero_freq_metal_local(gap, stack.slab)
    else:
        r1 = float(zero_freq_silica(eps_static(stack.half_space), gap.eps_b0, gap, k)[0])
        r2 = float(zero_freq_metal(gap, stack.slab, k)[0])
    return r1 * r2


def free_energy_zero_tm(stack):
    """Zero-frequency TM free energy ``-kB T Li3(r1 r2)/(16 pi L^2)`` (J/m²).

    With ions and a metallic slab ``r1 r2 = 1`` and the value is
    ``-kB T zeta(3)/(16 pi L^2)`` for any slab thickness.
    """
    x = _zero_freq_product(stack)
    li3 = ZETA3 if x == 1.0 else float(mpmath.polylog(3, x))
    return -prefactor(stack.separation, stack.temperature) * li3


def free_energy_zero_tm_quadrature(L, T, product=1.0, spec=QuadratureSpec()):
    """Quadrature of the zero-frequency TM integral with constant ``r1 r2 = product``."""
    f = lambda rows, s: (s * np.log1p(-product * np.exp(-s)))[None, :]
    v, _, _ = integrate_rows(f, 1, WINDOW, GRADING, spec.rel_tol, 0.0, 8, max(spec.max_subdivisions, 4096),
                             labels=["n=0 TM"])
    return prefactor(L, T) * float(v[0])


def free_energy_zero_long(stack, spec):
    """Zero-frequency longitudinal free energy (J/m², repulsive).

    ``kB T/(16 pi L^2) int v log(1 + r1_ll(0) e^-v) dv`` over
    ``v = 2 L sqrt(k^2 + 1/lambda_D^2) >= 2 L/lambda_D``, using ``r2_ll(0) = -1``.
    """
    gap = stack.gap
    if stack.local_gap or not gap.has_ions:
        return 0.0
    L = stack.separation
    v0 = 2.0 * L / gap.debye_length
    if v0 > 700.0:
        return 0.0
    e1 = eps_static(stack.half_space)
    P = prefactor(L, stack.temperature)

    def f(rows, s):
        v = v0 + s
        k = np.sqrt(s * (s + 2.0 * v0)) / (2.0 * L)
        r1 = zero_freq_silica(e1, gap.eps_b0, gap, k)[1]
        r2 = zero_freq_metal(gap, stack.slab, k)[1]
        return (v * np.log1p(-r1 * r2 * np.exp(-v)))[None, :]

    val, _, _ = integrate_rows(f, 1, WINDOW, GRADING, spec.rel_tol, spec.abs_tol / P, 8,
                               spec.max_subdivisions, labels=["n=0 longitudinal"])
    return P * float(val[0])


def _tail_estimate(terms):
    """Geometric estimate of ``2 sum_{m > n} |F_m|`` from the last few terms."""
    last = abs(terms[-1])
    if last == 0.0:
        return 0.0
    if len(terms) < 2:
        return math.inf
    recent = [abs(t) for t in terms[-5:]]
    if min(recent[:-1]) == 0.0:
        return math.inf
    rho = max(b / a for a, b in zip(recent[:-1], recent[1:]))
    if rho >= 1.0:
        return math.inf
    return 2.0 * last * rho / (1.0 - rho)


def total_free_energy(stack, spec=QuadratureSpec(), n_max=None):
    """Full free energy breakdown of ``stack``.

    Parameters
    ----------
    stack : LayerStack
    spec : QuadratureSpec
    n_max : int, optional
        Sum exactly ``n = 1 .. n_max`` instead of truncating adaptively.

    Returns
    -------
    EnergyBreakdown
    """
    L, T = stack.separation, stack.temperature
    f0_tm = free_energy_zero_tm(stack)
    f0_long = free_energy_zero_long(stack, spec)
    f0 = f0_tm + f0_long
    cap = matsubara_cap(L, T) if n_max is None else int(n_max)
    terms, errs = [], []
    tail = math.inf
    n, size = 1, 8
    while n <= cap:
        hi = min(n + size - 1, cap)
        try:
            v, e = free_energy_terms(stack, spec, n, hi)
        except ConvergenceError as exc:
            raise ConvergenceError(f"Matsubara block n={n}..{hi} failed: {exc}",
                                   exc.estimate, exc.error, exc.where) from None
        terms.extend(v.tolist())
        errs.extend(e.tolist())
        tail = _tail_estimate(terms)
        partial = f0 + 2.0 * math.fsum(terms)
        if n_max is None and tail <= spec.matsubara_tail_tol * abs(partial):
            break
        n, size = hi + 1, min(2 * size, 512)
    total = f0 + 2.0 * math.fsum(terms)
    return EnergyBreakdown(
        separation=L,
        temperature=T,
        debye_length=stack.gap.debye_length,
        f0_tm=f0_tm,
        f0_long=f0_long,
        f_n=tuple((i + 1, t) for i, t in enumerate(terms)),
        total=total,
        hamaker_over_kBT=hamaker_from_energy(total, L, T),
        n_max_used=len(terms),
        diagnostics={
            "matsubara_cap": matsubara_cap(L, T),
            "tail_estimate": tail,
            "quadrature_error": 2.0 * math.fsum(errs),
            "backend": kernels.BACKEND,
        },
    )


def hamaker(stack, spec=QuadratureSpec(), energy_selector="total"):
    """Hamaker function ``-12 pi L^2 F/(kB T)`` for one of ``HAMAKER_SELECTORS``."""
    if energy_selector not in HAMAKER_SELECTORS:
        raise ValueError(f"unknown selector {energy_selector!r}; choose from {HAMAKER_SELECTORS}")
    if energy_selector == "zero_frequency_only":
        F = free_energy_zero_tm(stack) + free_energy_zero_long(stack, spec)
        return hamaker_from_energy(F, stack.separation, stack.temperature)
    return total_free_energy(stack, spec).hamaker(energy_selector)


# ---------------------------------------------------------------------------
# full 3x3 round-trip validator


def _silica_lab(block):
    """Silica block in the frame of the round trip: p-l cross terms change sign
    under the mirror that maps the silica interface onto the metal one."""
    return replace(block, rpl=-block.rpl, rlp=-block.rlp)


def roundtrip_logdet(stack, xi, k, factorized=False, eps=None):
    """``log det(1 - M)`` of the full round trip ``M = R1 T R2 T`` at ``(xi, k)``.

    ``T = diag(e^{-kappa_3 L}, e^{-kappa_3 L}, e^{-kappa_l L})``. With
    ``factorized`` the s block and the (p, l) block are evaluated separately.
    """
    gap, L = stack.gap, stack.separation
    kin = kinematics(gap, stack.half_space, stack.slab, xi, k, ion_drude=True, eps=eps)
    R1 = _silica_lab(half_space_block(gap, kin))
    R2 = slab_block(gap, kin, stack.thickness)
    t3 = guarded_exp(kin.kappa3 * L)
    tl = guarded_exp(kin.kappa_ell * L)
    if factorized:
        ls = np.log1p(-R1.rss * R2.rss * t3 * t3)
        # 2x2 (p, l) block of 1 - R1 T R2 T
        a = 1.0 - (R1.rpp * t3 * R2.rpp * t3 + R1.rpl * tl * R2.rlp * t3)
        b = -(R1.rpp * t3 * R2.rpl * tl + R1.rpl * tl * R2.rll * tl)
        c = -(R1.rlp * t3 * R2.rpp * t3 + R1.rll * tl * R2.rlp * t3)
        dd = 1.0 - (R1.rlp * t3 * R2.rpl * tl + R1.rll * tl * R2.rll * tl)
        return ls + np.log(a * dd - b * c)
    z = np.zeros_like(t3)
    Tm = np.stack([np.stack([t3, z, z], -1), np.stack([z, t3, z], -1), np.stack([z, z, tl], -1)], -2)
    M = R1.matrix() @ Tm @ R2.matrix() @ Tm
    return np.log(np.linalg.det(np.eye(3) - M))


def logdet_at_xi(stack, spec, xi):
    """Round-trip free energy at one imaginary frequency ``xi > 0`` (J/m²).

    ``(kB T/2) int d^2k/(2 pi)^2 log det(1 - M(xi, k))`` in ``u = 2 kappa_3 L``.
    """
    if not xi > 0:
        raise ValueError("logdet_at_xi needs xi > 0")
    gap, L = stack.gap, stack.separation
    eps = (float(eval_material(stack.half_space, xi)), float(eval_material(stack.slab, xi)), float(gap.eps_b(xi)))
    e3 = eps[2] + gap.omega_p3**2 / (xi * (xi + gap.gamma_ions))
    q2 = (xi / CONSTANTS.c) ** 2
    u0 = 2.0 * L * math.sqrt(e3 * q2)
    P = prefactor(L, stack.temperature)

    def f(rows, s):
        u = u0 + s
        kappa3 = u / (2.0 * L)
        k = np.sqrt(np.maximum(kappa3 * kappa3 - e3 * q2, 0.0))
        return (u * roundtrip_logdet(stack, xi, k, eps=eps))[None, :]

    val, _, _ = integrate_rows(f, 1, WINDOW, GRADING, spec.rel_tol, spec.abs_tol / P, 8,
                               spec.max_subdivisions, labels=[f"xi={xi:.3e}"])
    return P * float(val[0])


def logdet_roundtrip(stack, spec=QuadratureSpec(), n=1):
    """Round-trip validator for Matsubara order ``n``.

    For ``n >= 1`` this is :func:`logdet_at_xi` at ``xi_n``; for ``n = 0`` the
    value at the smallest frequency of :func:`logdet_zero_sequence`.
    """
    if n == 0:
        return logdet_zero_sequence(stack, spec)[-1][1]
    return logdet_at_xi(stack, spec, n * matsubara_xi1(stack.temperature))


def logdet_zero_sequence(stack, spec=QuadratureSpec(), exponents=(8, 10, 12, 14, 16, 18)):
    """Round-trip energies at ``xi = xi_1 10^-j`` approaching zero frequency.

    Returns a list of ``(xi, energy)``; the energies converge to
    ``F0_TM + F0_long`` like ``xi`` itself.
    """
    xi1 = matsubara_xi1(stack.temperature)
    return [(xi1 * 10.0 ** (-j), logdet_at_xi(stack, spec, xi1 * 10.0 ** (-j))) for j in exponents]
