import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from ioncasimir import default_stack
from ioncasimir.electrolyte import ElectrolyteGap, kinematics
from ioncasimir.engine import (
    ZETA3,
    LayerStack,
    QuadratureSpec,
    free_energy_n,
    free_energy_zero_long,
    free_energy_zero_tm,
    free_energy_zero_tm_quadrature,
    hamaker,
    hamaker_from_energy,
    logdet_roundtrip,
    logdet_zero_sequence,
    matsubara_cap,
    prefactor,
    roundtrip_logdet,
    total_free_energy,
)
from ioncasimir.materials import Material, OscillatorModel, eval_material, shipped_material, vacuum
from ioncasimir.quadrature import ConvergenceError
from ioncasimir.quantities import CONSTANTS, matsubara_xi1
from oracles import cavity_det, eta3_series, ideal_mirror_energy, zeta3_series

KB = CONSTANTS.kB
XI1 = matsubara_xi1(300.0)


def test_stack_validation(stack):
    with pytest.raises(ValueError):
        stack.with_(separation=0.0)
    with pytest.raises(ValueError):
        stack.with_(thickness=-1e-9)
    s = stack.with_(debye_length=10e-9, temperature=310.0)
    assert s.gap.debye_length == 10e-9 and s.temperature == 310.0


@pytest.mark.parametrize("kw", [dict(rel_tol=0.0), dict(rel_tol=1e-2), dict(abs_tol=-1.0),
                                dict(max_subdivisions=8), dict(matsubara_tail_tol=0.0)])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        QuadratureSpec(**kw)


def test_free_energy_n_vanishes_without_contrast(spec):
    water = shipped_material("water")
    s = LayerStack(water, ElectrolyteGap(water, 100e-9), 100e-9, shipped_material("gold_drude"), 50e-9)
    assert free_energy_n(s, spec, 1) == 0.0


@pytest.mark.parametrize("L", [10e-9, 100e-9, 1e-6])
@pytest.mark.parametrize("n", [1, 3])
def test_ideal_mirror_matsubara_term(L, n, spec):
    mirror = Material("mirror", OscillatorModel(eps_inf=1e30))
    s = LayerStack(mirror, ElectrolyteGap(vacuum(), math.inf), L, mirror, 1e-3)
    got = free_energy_n(s, spec, n)
    assert got == pytest.approx(ideal_mirror_energy(L, 300.0, n * XI1), rel=1e-8)


def _local_slab_energy_k(stack, n):
    """F_n by direct quadrature over k with textbook local Fresnel formulas."""
    L, d = stack.separation, stack.thickness
    xi = n * XI1
    e1 = eval_material(stack.half_space, xi)
    e2 = eval_material(stack.slab, xi)
    e3 = stack.gap.eps_b(xi)
    q2 = (xi / CONSTANTS.c) ** 2

    def integrand(k):
        k1, k2, k3 = (math.sqrt(k * k + e * q2) for e in (e1, e2, e3))
        E = math.exp(-2 * k2 * d)
        total = 0.0
        for r1, r in (((k3 - k1) / (k3 + k1), (k3 - k2) / (k3 + k2)),
                      ((e1 * k3 - e3 * k1) / (e1 * k3 + e3 * k1), (e2 * k3 - e3 * k2) / (e2 * k3 + e3 * k2))):
            r2 = r * (1 - E) / (1 - r * r * E)
            total += math.log1p(-r1 * r2 * math.exp(-2 * k3 * L))
        return k * total

    kmax = 50.0 / L
    val = quad(integrand, 0.0, kmax, limit=400, epsabs=0.0, epsrel=1e-12)[0]
    return KB * 300.0 / (4.0 * math.pi) * val


@pytest.mark.parametrize("L", [1e-9, 100e-9, 2e-6])
def test_substitution_invariance(L, spec):
    s = default_stack(separation=L)
    for n in (1, 2, 25):
        assert free_energy_n(s, spec, n) == pytest.approx(_local_slab_energy_k(s, n), rel=1e-9)


def test_zero_frequency_tm_closed_form(stack):
    f = free_energy_zero_tm(stack)
    assert f == pytest.approx(-KB * 300.0 * ZETA3 / (16 * math.pi * (100e-9) ** 2), rel=1e-15)
    assert f == pytest.approx(-9.91e-9, rel=1e-3)
    assert free_energy_zero_tm(stack.with_(separation=200e-9)) == f / 4.0
    assert hamaker_from_energy(f, 100e-9, 300.0) == pytest.approx(0.75 * ZETA3, rel=1e-15)
    assert ZETA3 == pytest.approx(zeta3_series(), rel=1e-15)


def test_zero_frequency_tm_quadrature_matches(spec):
    for L in (10e-9, 100e-9, 1e-6):
        assert free_energy_zero_tm_quadrature(L, 300.0, 1.0, spec) == pytest.approx(
            -prefactor(L, 300.0) * zeta3_series(), rel=1e-10)


def test_alternating_saturation(spec):
    # r1_ll r2_ll -> -1 and lambda_D -> inf saturate the longitudinal term at +eta(3)
    v = free_energy_zero_tm_quadrature(100e-9, 300.0, -1.0, spec)
    assert v == pytest.approx(prefactor(100e-9, 300.0) * eta3_series(), rel=1e-10)
    assert eta3_series() == pytest.approx(0.75 * ZETA3, rel=1e-14)


def test_zero_frequency_long(stack, spec):
    f = free_energy_zero_long(stack, spec)
    assert 0.0 < f < 0.75 * abs(free_energy_zero_tm(stack))
    assert free_energy_zero_long(stack.with_(debye_length=1e-13), spec) == 0.0
    # screening reduces the repulsion monotonically
    vals = [free_energy_zero_long(stack.with_(debye_length=lam), spec) for lam in (900e-9, 100e-9, 10e-9, 1e-9)]
    assert all(b < a for a, b in zip(vals[:-1], vals[1:]))
    assert free_energy_zero_long(stack.with_(local_gap=True), spec) == 0.0


def test_total_breakdown(stack, spec):
    b = total_free_energy(stack, spec)
    assert b.total == b.f0_tm + b.f0_long + 2.0 * math.fsum(v for _, v in b.f_n)
    assert b.total < 0.0 and b.f0_tm < 0.0 and b.f0_long > 0.0
    assert b.n_max_used == len(b.f_n) < matsubara_cap(stack.separation, 300.0)
    assert b.diagnostics["tail_estimate"] <= spec.matsubara_tail_tol * abs(b.total)
    mags = [abs(v) for _, v in b.f_n]
    assert all(y < x for x, y in zip(mags[2:-1], mags[3:]))
    assert b.hamaker_over_kBT == pytest.approx(2.26, abs=0.01)
    d = b.to_dict()
    assert d["f_n"][0][0] == 1 and d["total"] == b.total


@pytest.mark.parametrize("L", [1e-9, 100e-9, 3e-6])
def test_truncation_soundness(L, spec):
    s = default_stack(separation=L)
    b = total_free_energy(s, spec)
    doubled = total_free_energy(s, spec, n_max=2 * b.n_max_used)
    assert abs(doubled.total - b.total) < 2 * spec.matsubara_tail_tol * abs(b.total)


def test_hamaker_selectors(stack, spec):
    F = -KB * 300.0 / (12 * math.pi * 1e-14)
    assert hamaker_from_energy(F, 1e-7, 300.0) == pytest.approx(1.0, rel=1e-15)
    b = total_free_energy(stack, spec)
    assert hamaker(stack, spec, "total") == b.hamaker("total")
    assert b.hamaker("total_minus_f0tm") == pytest.approx(b.hamaker("total") - 0.75 * ZETA3, rel=1e-12)
    far = stack.with_(separation=5e-6, debye_length=10e-9)
    assert hamaker(far, spec, "zero_frequency_only") == pytest.approx(0.75 * ZETA3, rel=1e-12)
    with pytest.raises(ValueError):
        hamaker(stack, spec, "bogus")
    with pytest.raises(ValueError):
        b.hamaker("bogus")


def test_attraction_and_monotone_magnitude(spec):
    for lam in (10e-9, 100e-9, 900e-9):
        tot = [total_free_energy(default_stack(separation=L, debye_length=lam), spec).total
               for L in np.geomspace(1e-9, 5e-6, 12)]
        assert all(t < 0 for t in tot)
        assert all(abs(b) < abs(a) for a, b in zip(tot[:-1], tot[1:]))


@pytest.mark.xfail(strict=True, reason="with the shipped silica/water data the n >= 1 terms still carry "
                                       "~12% at 1 um; see decisions ledger")
def test_zero_frequency_dominance(spec):
    b = total_free_energy(default_stack(separation=1e-6, debye_length=10e-9), spec)
    assert abs(b.f0_tm + b.f0_long) / abs(b.total) > 0.95


def test_no_ions_zero_frequency_is_repulsive(spec):
    s = default_stack(debye_length=math.inf, separation=1e-6)
    b = total_free_energy(s, spec)
    assert b.f0_tm > 0.0 and b.f0_long == 0.0


def test_local_mode_zero_frequency(stack, spec):
    b = total_free_energy(stack.with_(local_gap=True), spec)
    # r1 = -1, r2 ~ +1: the zero-frequency TM term turns repulsive
    assert b.f0_tm == pytest.approx(prefactor(100e-9, 300.0) * eta3_series(), rel=1e-8)


def test_convergence_error_names_order(stack):
    tight = QuadratureSpec(rel_tol=1e-16, max_subdivisions=16)
    with pytest.raises(ConvergenceError) as info:
        total_free_energy(stack, tight)
    assert "n=" in str(info.value)


def test_deterministic_and_thread_safe(spec):
    stacks = [default_stack(separation=L) for L in (3e-9, 30e-9, 300e-9)]
    serial = [total_free_energy(s, spec).total for s in stacks]
    with ThreadPoolExecutor(3) as pool:
        threaded = list(pool.map(lambda s: total_free_energy(s, QuadratureSpec(rel_tol=1e-10)).total, stacks))
    assert serial == threaded


# full 3x3 round trip


def test_logdet_matches_decoupled(stack, spec):
    for n in (1, 2, 10):
        assert logdet_roundtrip(stack, spec, n) == pytest.approx(free_energy_n(stack, spec, n), rel=1e-6)


def test_logdet_zero_sequence(stack, spec):
    target = free_energy_zero_tm(stack) + free_energy_zero_long(stack, spec)
    seq = logdet_zero_sequence(stack, spec)
    errs = [abs(v / target - 1) for _, v in seq]
    assert all(b < a for a, b in zip(errs[:-1], errs[1:]))
    assert errs[-1] < 1e-6
    assert logdet_roundtrip(stack, spec, 0) == seq[-1][1]


def test_logdet_of_transparent_slab_is_zero():
    water = shipped_material("water")
    s = LayerStack(shipped_material("silica"), ElectrolyteGap(water, math.inf), 100e-9, water, 50e-9)
    assert np.all(roundtrip_logdet(s, XI1, np.geomspace(1e5, 1e9, 9)) == 0.0)


@given(st.floats(-14.0, 1.5), st.floats(4.0, 9.5), st.sampled_from([10e-9, 100e-9, 900e-9]))
@settings(max_examples=40)
def test_det_factorization(lg_xi, lg_k, lam):
    s = default_stack(debye_length=lam, separation=20e-9)
    k = np.array([10.0**lg_k])
    xi = XI1 * 10.0**lg_xi
    full = roundtrip_logdet(s, xi, k)
    fac = roundtrip_logdet(s, xi, k, factorized=True)
    assert np.allclose(full, fac, rtol=1e-9, atol=1e-14)


@pytest.mark.parametrize("xi,k,L", [(1e9, 1e7, 10e-9), (3e9, 3e7, 5e-9), (1e8, 2e7, 20e-9), (1e6, 1e8, 2e-9)])
def test_roundtrip_matches_cavity_determinant(xi, k, L):
    s = default_stack(separation=L, debye_length=10e-9).with_(thickness=1e-3)
    g = s.gap
    e1, e2, eb = (float(eval_material(m, xi)) for m in (s.half_space, s.slab, s.gap.water))
    ratio = cavity_det(k, xi, L, e1, e2, eb, g.omega_p3, g.gamma_ions, g.v_th) / \
        cavity_det(k, xi, 1e4 * L, e1, e2, eb, g.omega_p3, g.gamma_ions, g.v_th)
    assert abs(ratio.imag) < 1e-10 * abs(ratio)
    kin = kinematics(g, s.half_space, s.slab, xi, np.array([k]))
    # TE part with ordinary Fresnel coefficients
    rs1 = (kin.kappa3 - kin.kappa1) / (kin.kappa3 + kin.kappa1)
    rs2 = (kin.kappa3 - kin.kappa2) / (kin.kappa3 + kin.kappa2)
    te = np.log1p(-rs1 * rs2 * np.exp(-2 * kin.kappa3 * L))
    got = roundtrip_logdet(s, xi, np.array([k]))
    assert float(got[0] - te[0]) == pytest.approx(math.log(ratio.real), rel=1e-8)
