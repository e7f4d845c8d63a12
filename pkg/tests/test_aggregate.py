import math

import numpy as np
import pytest

from migsim.aggregate import build_hamiltonian, rabi_period
from migsim.errors import InvalidParameterError, SingularGeometryError
from migsim.geometry import DisorderSpec, SystemGeometry, nominal_geometry, sample_realization

from conftest import T_PERIOD, eigen_propagate, paper_params

TWO_PI = 2.0 * math.pi


def test_two_site_coupling_value():
    g = nominal_geometry(2, 20.0, 1.0)
    h = build_hamiltonian(g, paper_params())
    assert h[0, 1] == pytest.approx(TWO_PI * 1619.0 / 8000.0, rel=1e-12)
    assert h[0, 1] == pytest.approx(1.2715596265, abs=1e-9)


def test_single_atom_is_trivial():
    g = SystemGeometry(1, 20.0, 1.0, np.zeros((1, 3)), np.array([[0.0, 1.0, 0.0]]))
    h = build_hamiltonian(g, paper_params())
    assert h.shape == (1, 1) and h[0, 0] == 0.0


def test_cubic_distance_law():
    near = build_hamiltonian(nominal_geometry(4, 10.0, 1.0), paper_params())
    far = build_hamiltonian(nominal_geometry(4, 20.0, 1.0), paper_params())
    assert np.allclose(near, 8.0 * far, rtol=1e-12)


def test_symmetric_zero_diagonal_under_disorder():
    g = sample_realization(nominal_geometry(5, 20.0, 1.0), DisorderSpec(0.5, seed=2), 3)
    h = build_hamiltonian(g, paper_params())
    assert np.array_equal(h, h.T)
    assert np.all(np.diag(h) == 0.0)
    # all pairs are coupled, not just nearest neighbours
    assert h[0, 4] != 0.0


def test_coincident_atoms_rejected():
    pos = np.zeros((2, 3))
    g = SystemGeometry(2, 20.0, 1.0, pos, pos + [[0.0, 1.0, 0.0]])
    with pytest.raises(SingularGeometryError):
        build_hamiltonian(g, paper_params())


def test_rabi_period_paper_value():
    assert rabi_period(20.0, TWO_PI * 1619.0) == pytest.approx(T_PERIOD, rel=1e-12)
    assert abs(rabi_period(20.0, TWO_PI * 1619.0) - 1.2355) < 1e-3


def test_rabi_period_scaling_and_sign():
    base = rabi_period(20.0, TWO_PI * 1619.0)
    assert rabi_period(40.0, TWO_PI * 1619.0) == pytest.approx(8 * base, rel=1e-12)
    assert rabi_period(20.0, -TWO_PI * 1619.0) == base
    with pytest.raises(InvalidParameterError):
        rabi_period(20.0, 0.0)


def test_two_site_full_transfer_at_period():
    g = nominal_geometry(2, 20.0, 1.0)
    h = build_hamiltonian(g, paper_params())
    psi = eigen_propagate(h, np.array([1.0, 0.0]), np.array([T_PERIOD]))
    assert abs(psi[0, 1]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_bare_chain_contrast_at_readout():
    # The free chain transiently refocuses on the far site around 2.1
    # transfer periods (rho_55 peaks near 0.87), but has long moved on by
    # the guided readout at 4.9 us, where the contrast against guiding is
    # large.
    g = nominal_geometry(5, 20.0, 1.0)
    h = build_hamiltonian(g, paper_params())
    times = np.linspace(0.0, 5 * T_PERIOD, 6001)
    psi0 = np.zeros(5)
    psi0[0] = 1.0
    amp = eigen_propagate(h, psi0, times)
    rho55 = np.abs(amp[:, 4]) ** 2
    assert rho55.max() == pytest.approx(0.8726, abs=2e-3)
    at_readout = np.abs(eigen_propagate(h, psi0, np.array([4.9]))[0, 4]) ** 2
    assert at_readout < 0.1
