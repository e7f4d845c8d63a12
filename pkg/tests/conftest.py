import math

import numpy as np

from migsim.params import PhysicalParams

TWO_PI = 2.0 * math.pi

#: nearest-neighbour transfer period at R=20 um, C3/2pi = 1619 MHz um^3
T_PERIOD = 1.2353304508956144


def paper_params(**overrides):
    """Experimentally motivated defaults used across the suite."""
    kw = dict(
        c3=TWO_PI * 1619.0,
        c6_s=-TWO_PI * 87.0,
        c4_p=-TWO_PI * 1032.0,
        omega_p0=TWO_PI * 45.0,
        omega_c=TWO_PI * 90.0,
        gamma_p=TWO_PI * 6.1,
    )
    kw.update(overrides)
    return PhysicalParams(**kw)


def eigen_propagate(h, psi0, times):
    """Independent unitary propagator via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    c0 = v.T.conj() @ psi0
    return (np.exp(-1j * np.outer(times, w)) * c0) @ v.T.conj()
