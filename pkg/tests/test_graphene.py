import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphene_cp.constants import CODATA
from graphene_cp.errors import BranchError, DomainError, IndeterminateError, UnsupportedStateError
from graphene_cp.graphene import (DiracValidityWarning, GrapheneModel, evanescent_coefficients,
                                  imag_axis_coefficients, r_te_evanescent, r_te_imag,
                                  r_tm_evanescent, r_tm_imag)

G = GrapheneModel.rounded()
c = CODATA.c

xis = st.floats(min_value=0, max_value=3e15)
ks = st.floats(min_value=0, max_value=1e10)


def test_model_validation():
    with pytest.raises(DomainError):
        GrapheneModel(v_tilde=1.0)
    with pytest.raises(DomainError):
        GrapheneModel(v_tilde=0.0)
    with pytest.raises(UnsupportedStateError):
        GrapheneModel(mass_gap=0.01)
    with pytest.raises(UnsupportedStateError):
        GrapheneModel(chem_potential=0.01)


def test_rounded_model():
    assert G.v_tilde == 1 / 300 and G.alpha_fs == 1 / 137


def test_near_field_limits():
    assert r_tm_imag(G, 1e10, 1e12) == pytest.approx(0.7747, abs=1e-4)
    assert G.near_field_tm == pytest.approx(0.7747, abs=1e-4)
    assert r_te_imag(G, 1e10, 1e12) == pytest.approx(-3.8e-5, rel=0.01, abs=0)
    assert G.near_field_te == pytest.approx(-math.pi / 137 / 300 / (math.pi / 137 / 300 + 2), rel=1e-14, abs=0)


def test_normal_incidence():
    tm, te = r_tm_imag(G, 1e14, 0.0), r_te_imag(G, 1e14, 0.0)
    assert tm == pytest.approx(0.01134, abs=1e-5)
    assert te == pytest.approx(-tm, rel=1e-14, abs=0)


def test_transparent_sheet():
    g0 = GrapheneModel(alpha_fs=0.0)
    assert r_tm_imag(g0, 1e14, 1e7) == 0.0
    assert r_te_imag(g0, 1e14, 1e7) == 0.0
    assert r_tm_evanescent(g0, 1e12, 1e8) == 0.0
    assert r_te_evanescent(g0, 1e12, 1e8) == 0.0


def test_closed_form():
    xi, k = 2e14, 3e6
    k0 = xi / c
    q, s = math.hypot(k0, k), math.hypot(k0, G.v_tilde * k)
    a = G.alpha_fs
    tm = 4 * math.pi * a * q / (4 * math.pi * a * q + 8 * s)
    te = -4 * math.pi * a * s / (4 * math.pi * a * s + 8 * q)
    assert r_tm_imag(G, xi, k) == pytest.approx(tm, rel=1e-14, abs=0)
    assert r_te_imag(G, xi, k) == pytest.approx(te, rel=1e-14, abs=0)


@given(xis, ks)
def test_passivity_bounds(xi, k):
    if xi == 0 and k == 0:
        return
    te, tm = imag_axis_coefficients(G, xi, k, c)
    assert 0 <= tm < 1
    assert -1 < te <= 0


@given(st.floats(min_value=1e6, max_value=1e15), st.floats(min_value=1e2, max_value=1e9),
       st.floats(min_value=1.01, max_value=100))
def test_monotonic_in_k(xi, k, factor):
    te1, tm1 = imag_axis_coefficients(G, xi, k, c)
    te2, tm2 = imag_axis_coefficients(G, xi, k * factor, c)
    assert tm2 >= tm1 * (1 - 4e-16)
    assert abs(te2) <= abs(te1) * (1 + 4e-16)


@given(st.floats(min_value=1e6, max_value=1e15), st.floats(min_value=0, max_value=1e9))
def test_symmetry_at_unit_velocity(xi, k):
    g1 = GrapheneModel(v_tilde=1 - 1e-13)
    te, tm = imag_axis_coefficients(g1, xi, k, c)
    assert abs(te) == pytest.approx(abs(tm), rel=1e-10, abs=0)


@pytest.mark.parametrize("k", [1e4, 1e6, 1e8])
def test_continuity_between_branches(k):
    # at vanishing frequency the imaginary-axis and evanescent coefficients coincide
    w = 1e-3
    te_i, tm_i = imag_axis_coefficients(G, w, k, c)
    te_e, tm_e = evanescent_coefficients(G, w, math.sqrt(k * k - (w / c) ** 2), c)
    assert tm_e.real == pytest.approx(tm_i, rel=1e-10, abs=0)
    assert te_e.real == pytest.approx(te_i, rel=1e-10, abs=0)


def test_evanescent_near_field_limits():
    w = 2 * math.pi * 1e11
    assert r_tm_evanescent(G, w, 1e9) == pytest.approx(G.near_field_tm, rel=1e-6, abs=0)
    assert r_te_evanescent(G, w, 1e9) == pytest.approx(G.near_field_te, rel=1e-6, abs=0)


def test_evanescent_branch_guard():
    w = 2 * math.pi * 1e11
    threshold = w / c * math.sqrt(1 / G.v_tilde**2 - 1)
    assert r_tm_evanescent(G, w, 1.001 * threshold) > 0
    with pytest.raises(BranchError):
        r_tm_evanescent(G, w, 0.5 * threshold)
    with pytest.raises(DomainError):
        r_te_evanescent(G, -w, 1e6)


def test_evanescent_below_threshold_is_complex():
    w = 2 * math.pi * 1e11
    threshold = w / c * math.sqrt(1 / G.v_tilde**2 - 1)
    te, tm = evanescent_coefficients(G, w, 0.3 * threshold, c)
    assert tm.imag != 0 and te.imag != 0
    # bounded, like a passive sheet
    assert abs(tm) <= 1 and abs(te) <= 1


def test_argument_errors():
    with pytest.raises(IndeterminateError):
        r_tm_imag(G, 0.0, 0.0)
    with pytest.raises(DomainError):
        r_te_imag(G, -1.0, 1.0)


def test_dirac_validity_warning():
    xi = 3.0 * CODATA.e_charge / CODATA.hbar
    with pytest.warns(DiracValidityWarning):
        r_tm_imag(G, xi, 1e7)
