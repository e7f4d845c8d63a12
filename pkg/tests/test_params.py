import math

import pytest
from hypothesis import given, strategies as st

from migsim.errors import InvalidParameterError, UnitTagError
from migsim.params import crossover_shift, from_paper_units, to_paper_units

from conftest import paper_params

TWO_PI = 2.0 * math.pi


def test_mhz_conversion():
    assert from_paper_units(1619.0, "per2pi_MHz") == pytest.approx(10172.477012, abs=1e-5)


def test_khz_conversion():
    assert from_paper_units(0.5, "per2pi_kHz") == pytest.approx(TWO_PI * 5e-4, rel=1e-15)


def test_identity_tags():
    assert from_paper_units(20.0, "um") == 20.0
    assert from_paper_units(1.3, "us") == 1.3
    assert from_paper_units(2.5, "dimensionless") == 2.5


def test_unknown_tag_rejected():
    with pytest.raises(UnitTagError):
        from_paper_units(1.0, "MHz")
    with pytest.raises(UnitTagError):
        to_paper_units(1.0, "rad")


@given(
    value=st.floats(min_value=1e-6, max_value=1e6),
    tag=st.sampled_from(["per2pi_MHz", "per2pi_kHz", "um", "us", "dimensionless"]),
)
def test_round_trip_exact(value, tag):
    back = to_paper_units(from_paper_units(value, tag), tag)
    assert abs(back - value) <= 1e-12 * abs(value)


@given(value=st.floats(min_value=1e-3, max_value=1e6))
def test_representation_invariance(value):
    as_mhz = from_paper_units(value, "per2pi_MHz")
    as_khz = from_paper_units(value * 1e3, "per2pi_kHz")
    assert as_khz == pytest.approx(as_mhz, rel=1e-12)


def test_crossover_shift_paper_value():
    # Omega_c/2pi = 90 MHz, Gamma_p/2pi = 6.1 MHz
    assert crossover_shift(paper_params()) / TWO_PI == pytest.approx(663.9344262295, abs=1e-6)


def test_crossover_shift_quadratic_in_coupling():
    base = crossover_shift(paper_params())
    assert crossover_shift(paper_params(omega_c=2 * TWO_PI * 90.0)) == pytest.approx(4 * base)


def test_crossover_shift_vanishes_with_coupling():
    # quadratic limit: shrinking the coupling sends the scale to zero
    tiny = crossover_shift(paper_params(omega_p0=0.0, omega_c=1e-8))
    assert tiny == pytest.approx(0.0, abs=1e-12)


@given(
    omega_c=st.floats(min_value=1.0, max_value=1e4),
    gamma_p=st.floats(min_value=0.1, max_value=1e3),
    lam=st.floats(min_value=0.1, max_value=10.0),
)
def test_crossover_shift_homogeneity(omega_c, gamma_p, lam):
    p = paper_params(omega_p0=0.0, omega_c=omega_c, gamma_p=gamma_p)
    p_c = paper_params(omega_p0=0.0, omega_c=lam * omega_c, gamma_p=gamma_p)
    p_g = paper_params(omega_p0=0.0, omega_c=omega_c, gamma_p=lam * gamma_p)
    base = crossover_shift(p)
    assert crossover_shift(p_c) == pytest.approx(lam**2 * base, rel=1e-12)
    assert crossover_shift(p_g) == pytest.approx(base / lam, rel=1e-12)


def test_invalid_parameters_rejected():
    with pytest.raises(InvalidParameterError):
        paper_params(gamma_p=0.0)
    with pytest.raises(InvalidParameterError):
        paper_params(gamma_p=-1.0)
    with pytest.raises(InvalidParameterError):
        paper_params(omega_c=-5.0)
    with pytest.raises(InvalidParameterError):
        paper_params(omega_p0=-1.0)
    with pytest.raises(InvalidParameterError):
        paper_params(omega_p0=TWO_PI * 90.0)  # ratio 1


def test_validity_warning_above_half():
    with pytest.warns(UserWarning):
        paper_params(omega_p0=TWO_PI * 50.0)  # ratio 0.56


def test_default_probe_ratio():
    assert paper_params().probe_ratio == 2.5
