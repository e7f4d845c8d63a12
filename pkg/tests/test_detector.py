import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from migsim.detector import (
    build_interactions,
    effective_operators,
    jump_response,
    shadow_radius,
    shift_response,
)
from migsim.errors import InvalidParameterError, SingularGeometryError
from migsim.geometry import SystemGeometry, nominal_geometry
from migsim.params import crossover_shift

from conftest import T_PERIOD, paper_params

TWO_PI = 2.0 * math.pi


class ConstantProbe:
    def __init__(self, amplitude):
        self.peak_amplitude = amplitude

    def value(self, x, t):
        return np.full(np.shape(x), self.peak_amplitude)


def test_single_pair_p_term():
    # lone chain atom carrying the excitation, detector 1 um away
    g = SystemGeometry(1, 20.0, 1.0, np.zeros((1, 3)), np.array([[0.0, 1.0, 0.0]]))
    table = build_interactions(g, paper_params())
    assert table.vbar[0, 0] == pytest.approx(-TWO_PI * 1032.0, rel=1e-12)


def test_s_shadow_dominates_for_unexcited_neighbour():
    # excitation on atom 1; detector flanking atom 2 mostly feels atom 2's
    # s-state van der Waals shift
    g = nominal_geometry(2, 20.0, 1.0)
    table = build_interactions(g, paper_params())
    s_term = -TWO_PI * 87.0  # C6s / (1 um)^6
    assert table.vbar[1, 0] == pytest.approx(-546.67744639, abs=1e-6)
    assert abs(table.vbar[1, 0] - s_term) < 0.02 * abs(s_term)


def test_zero_coefficients_zero_table():
    g = nominal_geometry(3, 20.0, 1.0)
    table = build_interactions(g, paper_params(c6_s=0.0, c4_p=0.0))
    assert np.all(table.vbar == 0.0)


def test_coincident_detector_rejected():
    g = nominal_geometry(2, 20.0, 1.0)
    bad = SystemGeometry(2, 20.0, 0.0, g.aggregate_pos, g.aggregate_pos.copy())
    with pytest.raises(SingularGeometryError):
        build_interactions(bad, paper_params())


def test_shadow_radii_paper_values():
    p = paper_params()
    r_s = shadow_radius(p.c6_s, 6, p)
    r_p = shadow_radius(p.c4_p, 4, p)
    assert r_s == pytest.approx(0.7127, abs=1e-3)
    assert r_p == pytest.approx(1.1166, abs=1e-3)
    # detectors at 1 um sit between the two shadows
    assert r_s < 1.0 < r_p


def test_shadow_radius_validates_eta():
    with pytest.raises(InvalidParameterError):
        shadow_radius(1.0, 5, paper_params())


def test_effective_operators_vanish_without_probe():
    g = nominal_geometry(3, 20.0, 1.0)
    p = paper_params()
    ops = effective_operators(build_interactions(g, p), ConstantProbe(0.0), p, 0.0)
    assert np.all(ops.h_diag == 0.0)
    assert np.all(ops.l_diag == 0.0)


def test_effective_operator_asymptotics():
    p = paper_params()
    vc = crossover_shift(p)
    # far inside the shadow the jump saturates and the shift vanishes
    assert abs(jump_response(np.array([1e12]), vc)[0]) == pytest.approx(1.0, rel=1e-10)
    assert shift_response(np.array([1e12]), vc)[0] == pytest.approx(vc**2 / 1e12, rel=1e-6)
    # exactly zero shift means exactly zero jump amplitude
    assert jump_response(np.array([0.0]), vc)[0] == 0.0


def test_effective_operator_crossover_point():
    p = paper_params()
    vc = crossover_shift(p)
    amp = p.omega_p0
    g = SystemGeometry(1, 20.0, 1.0, np.zeros((1, 3)), np.array([[0.0, 1.0, 0.0]]))
    table = build_interactions(g, p)
    table.vbar[0, 0] = vc  # place the shift exactly at the crossover
    ops = effective_operators(table, ConstantProbe(amp), p, 0.0)
    assert ops.h_diag[0] == pytest.approx(amp**2 / p.omega_c**2 * vc / 2, rel=1e-12)
    assert abs(ops.l_diag[0, 0]) == pytest.approx(amp / math.sqrt(2 * p.gamma_p), rel=1e-12)


@given(st.lists(st.floats(min_value=1.0, max_value=1e6), min_size=2, max_size=10, unique=True))
def test_jump_rate_monotone_in_shift_magnitude(vbars):
    vc = crossover_shift(paper_params())
    for sign in (1.0, -1.0):
        v = sign * np.sort(np.array(vbars))
        rates = np.abs(jump_response(v, vc)) ** 2
        ordered = rates[np.argsort(np.abs(v))]
        assert np.all(np.diff(ordered) >= -1e-15)


def test_strong_measurement_regime_nominal():
    # jump rate of a detector flanking the excited site, probe at peak;
    # frozen from the closed form at the experimental numbers
    p = paper_params(omega_p0=TWO_PI * 18.0)
    g = nominal_geometry(5, 20.0, 1.0)
    table = build_interactions(g, p)
    ops = effective_operators(table, ConstantProbe(p.omega_p0), p, 0.0)
    rate = abs(ops.l_diag[2, 2]) ** 2
    assert rate == pytest.approx(236.04, abs=0.05)
    # strongly projective on the transfer timescale
    assert rate * T_PERIOD > 100.0


def test_detector_distinguishes_only_its_own_site():
    # the s-state shadow is common to all other sites, so the jump
    # amplitudes differ appreciably only for the measured site
    p = paper_params()
    g = nominal_geometry(5, 20.0, 1.0)
    ops = effective_operators(build_interactions(g, p), ConstantProbe(p.omega_p0), p, 0.0)
    l2 = ops.l_diag[2]
    others = np.delete(l2, 2)
    assert np.abs(others - others[0]).max() < 1e-3 * abs(l2[2] - others[0])
