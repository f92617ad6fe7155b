import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ioncasimir.quantities import (
    CONSTANTS,
    angular_to_ev,
    ev_to_angular,
    matsubara,
    matsubara_xi1,
    thermal_energy,
)
from oracles import matsubara_oracle


def test_constants_positive_and_codata():
    for name in ("hbar", "c", "kB", "e_charge", "eps0", "atomic_mass_unit"):
        assert getattr(CONSTANTS, name) > 0
    assert CONSTANTS.c == 299792458.0
    assert CONSTANTS.kB == 1.380649e-23


def test_ev_to_angular_examples():
    assert ev_to_angular(0.0) == 0.0
    # 9 eV and 35 meV; CODATA hbar = h/(2 pi) = 1.0545718176e-34 J s
    assert ev_to_angular(9.0) == pytest.approx(1.3673e16, rel=1e-4)
    assert ev_to_angular(0.035) == pytest.approx(5.317e13, rel=1e-3)
    assert ev_to_angular(9.0) == pytest.approx(9 * 1.602176634e-19 * 2 * math.pi / 6.62607015e-34, rel=1e-15)


def test_ev_to_angular_rejects_negative():
    with pytest.raises(ValueError):
        ev_to_angular(-1.0)
    with pytest.raises(ValueError):
        angular_to_ev(-1.0)


def test_matsubara_examples():
    assert matsubara(0, 123.0).xi == 0.0
    assert matsubara(1, 300.0).xi == pytest.approx(2.468e14, rel=1e-3)
    assert matsubara(1, 300.0).xi == pytest.approx(matsubara_oracle(1, 300.0), rel=1e-14)
    assert matsubara(2, 300.0).xi == 2.0 * matsubara(1, 300.0).xi
    assert matsubara_xi1(300.0) == matsubara(1, 300.0).xi


@pytest.mark.parametrize("bad", [(-1, 300.0), (1.5, 300.0), (1, 0.0), (1, -5.0), (1, math.nan)])
def test_matsubara_rejects(bad):
    with pytest.raises(ValueError):
        matsubara(*bad)


@given(st.integers(0, 10**6), st.integers(1, 1000))
def test_matsubara_linear_in_n(n, m):
    x1 = matsubara(1, 300.0).xi
    assert matsubara(n, 300.0).xi == n * x1
    assert (matsubara(n, 300.0).xi == 0.0) == (n == 0)


@given(st.floats(1.0, 1e4), st.integers(1, 64))
def test_matsubara_linear_in_T(T, m):
    assert matsubara(3, m * T).xi == pytest.approx(m * matsubara(3, T).xi, rel=4e-16)


@given(st.one_of(st.just(0.0), st.floats(1e-200, 1e4)))
def test_ev_roundtrip(v):
    back = angular_to_ev(ev_to_angular(v))
    assert back == pytest.approx(v, rel=4e-16, abs=0.0)


def test_thermal_energy():
    assert thermal_energy(300.0) == CONSTANTS.kB * 300.0
    assert np.isfinite(thermal_energy())
