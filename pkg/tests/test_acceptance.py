"""Acceptance criteria, each checked at its stated tolerance and time budget.

Every test records one PASS/FAIL line (printed immediately and again in the
terminal summary) before asserting, so a failing criterion still reports its
numbers.
"""
import math
import time

import mpmath
import numpy as np
import pytest

from conftest import ACCEPTANCE
from oracles import zeta3_series
from ioncasimir import QuadratureSpec, default_stack, total_free_energy
from ioncasimir.electrolyte import eps_longitudinal_k2, kappa_ell, kinematics
from ioncasimir.engine import free_energy_zero_long, free_energy_zero_tm, free_energy_zero_tm_quadrature, prefactor
from ioncasimir.quantities import CONSTANTS, matsubara_xi1
from ioncasimir.reflection import slab_block, zero_freq_metal, zero_freq_metal_local
from ioncasimir.validation import (
    check_logdet_decoupled,
    check_logdet_zero_frequency,
    check_no_ion_reduction,
    check_thickness_independence,
    free_energy_zero_tm_printed,
)

NM = 1e-9
SPEC = QuadratureSpec()
LAMBDAS = (10 * NM, 100 * NM, 900 * NM)
GRID_L = np.geomspace(1 * NM, 1000 * NM, 20)
K_PROBE = (1e5, 1e7, 1e9)
D_PROBE = (20 * NM, 50 * NM, 100 * NM)


def report(crit, ok, elapsed, budget, summary):
    ok = bool(ok) and elapsed < budget
    line = f"{summary} [{elapsed:.2f} s / {budget:g} s]"
    ACCEPTANCE.append((crit, ok, line))
    print(f"{'PASS' if ok else 'FAIL'}  criterion {crit}: {line}")
    return ok


def test_sign_flip():
    t0 = time.perf_counter()
    stack = default_stack()
    gap = stack.gap
    closed = float(zero_freq_metal(gap, stack.slab, np.asarray(K_PROBE))[0][0])
    local = zero_freq_metal_local(gap, stack.slab)
    xi1 = matsubara_xi1(stack.temperature)

    def deviation(xi):
        kin = kinematics(gap, stack.half_space, stack.slab, xi, np.asarray(K_PROBE))
        return max(float(np.max(np.abs(slab_block(gap, kin, d).rpp + 1.0))) for d in D_PROBE)

    dev8 = deviation(xi1 * 1e-8)
    dev16 = deviation(xi1 * 1e-16)
    elapsed = time.perf_counter() - t0
    ok = closed == -1.0 and dev8 <= 1e-3 and 0.999 < local < 1.0
    assert report(1, ok, elapsed, 1.0,
                  f"r2_pp(0) = {closed:g}; max |slab r_pp + 1| at 1e-8 xi1 = {dev8:.3g} (tol 1e-3), "
                  f"at 1e-16 xi1 = {dev16:.3g}; local value = {local:.15f}")


def test_universal_tm_term():
    t0 = time.perf_counter()
    T = 300.0
    z3 = zeta3_series()
    worst = 0.0
    ratio = None
    for L in (10 * NM, 100 * NM, 1000 * NM):
        quad = free_energy_zero_tm_quadrature(L, T, 1.0, SPEC)
        oracle = -CONSTANTS.kB * T * z3 / (16 * math.pi * L * L)
        worst = max(worst, abs(quad / oracle - 1.0))
        ratio = free_energy_zero_tm_printed(L, T) / oracle
    elapsed = time.perf_counter() - t0
    flag = "2 pi discrepancy flagged" if abs(ratio - 2 * math.pi) < 1e-12 else "no 2 pi discrepancy"
    assert report(2, worst <= 1e-8, elapsed, 1.0,
                  f"max rel error vs series = {worst:.2e} (tol 1e-8); "
                  f"-kB T zeta(3)/(8 L^2) over closed form = {ratio:.12f} ({flag})")


def test_longitudinal_bound():
    t0 = time.perf_counter()
    worst = 0.0
    positive = True
    for lam in LAMBDAS:
        for L in GRID_L:
            s = default_stack(separation=L, debye_length=lam)
            fl, ft = free_energy_zero_long(s, SPEC), free_energy_zero_tm(s)
            positive &= fl > 0
            worst = max(worst, fl / (0.75 * abs(ft)))
    elapsed = time.perf_counter() - t0
    assert report(3, positive and worst < 1.0, elapsed, 5.0,
                  f"F0_long > 0 on all 60 points: {positive}; max F0_long/(0.75 |F0_TM|) = {worst:.4f} (< 1)")


def test_attraction_everywhere():
    t0 = time.perf_counter()
    worst = -math.inf
    for lam in LAMBDAS:
        for L in GRID_L:
            b = total_free_energy(default_stack(separation=L, debye_length=lam), SPEC)
            worst = max(worst, b.hamaker_over_kBT * -1.0)
    elapsed = time.perf_counter() - t0
    assert report(4, worst < 0, elapsed, 120.0,
                  f"min H_total over the grid = {-worst:.4f} (> 0 means total < 0 everywhere)")


def test_hamaker_asymptote():
    t0 = time.perf_counter()
    b = total_free_energy(default_stack(separation=5000 * NM, debye_length=10 * NM), SPEC)
    h = b.hamaker("total")
    elapsed = time.perf_counter() - t0
    err = abs(h / 0.901 - 1.0)
    assert report(5, err <= 0.02, elapsed, 10.0, f"H_total(5 um, lambda_D 10 nm) = {h:.4f} kBT (target 0.901 +/- 2%)")


def test_short_distance_hamaker_report():
    """Reported, not gated: the shipped silica/water/gold data are representative."""
    t0 = time.perf_counter()
    parts = []
    within = True
    for gold in ("gold_drude", "gold_tabulated"):
        b = total_free_energy(default_stack(separation=1 * NM, gold=gold), SPEC)
        ht, hm = b.hamaker("total"), b.hamaker("total_minus_f0tm")
        within &= abs(ht / 8.98 - 1) <= 0.1 and abs(hm / 8.08 - 1) <= 0.1
        parts.append(f"{gold}: H_total = {ht:.3f}, H_minus_f0tm = {hm:.3f}")
    elapsed = time.perf_counter() - t0
    ok = report(6, within, elapsed, 30.0,
                "REPORT ONLY, not gated; targets 8.98 / 8.08 +/- 10%; " + "; ".join(parts))
    assert elapsed < 30.0 or ok


def test_validator_equivalences():
    t0 = time.perf_counter()
    s = default_stack()
    checks = [check_logdet_decoupled(s, SPEC, (1, 2, 10), 1e-6), check_logdet_zero_frequency(s, SPEC, 1e-6),
              check_thickness_independence(s, SPEC, 1e-6), check_no_ion_reduction(s, 1e-12)]
    elapsed = time.perf_counter() - t0
    ok = all(c.status == "pass" for c in checks)
    assert report(7, ok, elapsed, 30.0, "; ".join(f"{c.name} {c.status} ({c.value:.2e} vs {c.tolerance:g})" for c in checks))


def test_weak_screening_non_monotone():
    t0 = time.perf_counter()
    Ls = np.geomspace(100 * NM, 5000 * NM, 24)
    rows = [total_free_energy(default_stack(separation=L, debye_length=900 * NM), SPEC) for L in Ls]
    H = np.array([b.hamaker("total") for b in rows])
    Hm = np.array([b.hamaker("total_minus_f0tm") for b in rows])
    steps = np.sign(np.diff(H))
    changes = int(np.count_nonzero(steps[1:] != steps[:-1]))
    i = int(np.argmin(H)) if changes else -1
    elapsed = time.perf_counter() - t0
    ok = changes >= 1 and Hm[-1] < 0
    assert report(8, ok, elapsed, 120.0,
                  f"{changes} sign change(s) of dH; extremum H = {H[i]:.4f} at L = {Ls[i] / NM:.0f} nm; "
                  f"H_minus_f0tm(5 um) = {Hm[-1]:.4f}")


def test_dispersion_relation_identity():
    t0 = time.perf_counter()
    gap = default_stack().gap
    worst = mpmath.mpf(0)
    with mpmath.workdps(40):
        for xi in np.geomspace(1e6, 1e17, 20):
            x = mpmath.mpf(xi)
            eb = gap.eps_b(x)
            for k in np.geomspace(1e4, 1e10, 20):
                kk = mpmath.mpf(k)
                kl = kappa_ell(gap, x, kk, eb)
                worst = max(worst, abs(eps_longitudinal_k2(gap, x, kk * kk - kl * kl, eb)) / eb)
    elapsed = time.perf_counter() - t0
    assert report(9, worst <= 1e-10, elapsed, 1.0,
                  f"max |eps_l|/eps_b at K^2 = k^2 - kappa_l^2 over 20x20 grid = {float(worst):.2e} (tol 1e-10)")
