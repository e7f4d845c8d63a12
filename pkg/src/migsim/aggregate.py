"""Single-excitation exciton Hamiltonian of the bare chain."""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidParameterError, SingularGeometryError
from .geometry import SystemGeometry
from .params import PhysicalParams

# separations below this are treated as a coincidence rather than physics
_MIN_SEPARATION = 1e-9


def build_hamiltonian(geom: SystemGeometry, params: PhysicalParams) -> np.ndarray:
    """All-pairs dipole-dipole exchange matrix C3/r^3 in the site basis.

    Returns a real symmetric (N, N) array with zero diagonal, in rad/us,
    evaluated at the realized (possibly disordered) positions.  Couplings
    beyond nearest neighbours are kept; they matter for guiding fidelity.
    """
    pos = geom.aggregate_pos
    n = pos.shape[0]
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    off = ~np.eye(n, dtype=bool)
    if n > 1 and dist[off].min() < _MIN_SEPARATION:
        i, j = divmod(int(np.argmin(np.where(off, dist, np.inf))), n)
        raise SingularGeometryError(f"chain atoms {i + 1} and {j + 1} coincide")
    h = np.zeros((n, n))
    h[off] = params.c3 / dist[off] ** 3
    return h


def rabi_period(lattice_r: float, c3: float) -> float:
    """Time for a full nearest-neighbour population transfer, pi*R^3/(2|C3|)."""
    if c3 == 0:
        raise InvalidParameterError("c3 must be non-zero")
    return math.pi * lattice_r**3 / (2.0 * abs(c3))
