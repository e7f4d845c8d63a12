"""Chain and detector layouts, nominal and disorder-perturbed."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGeometryError

_AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True, eq=False)
class SystemGeometry:
    """3D positions of chain atoms and their flanking detector atoms.

    Site n (1-based) sits nominally at ((n-1)*R, 0, 0); its detector at
    ((n-1)*R, delta_y, 0).  Positions are frozen for the duration of a run.
    """

    n_sites: int
    lattice_r: float
    detector_offset_y: float
    aggregate_pos: np.ndarray  # (n_sites, 3), um
    detector_pos: np.ndarray   # (n_sites, 3), um


@dataclass(frozen=True)
class DisorderSpec:
    """Gaussian position scatter applied independently per coordinate.

    sigma_trap is the harmonic-trap ground-state width; dims selects which
    coordinates are perturbed.
    """

    sigma_trap: float
    dims: tuple = ("x", "y")
    seed: int = 0

    def __post_init__(self):
        if self.sigma_trap < 0:
            raise InvalidGeometryError("sigma_trap must be non-negative")
        bad = [d for d in self.dims if d not in _AXES]
        if bad:
            raise InvalidGeometryError(f"unknown disorder dims {bad}; use subsets of x,y,z")


def nominal_geometry(n_sites: int, lattice_r: float, detector_offset_y: float) -> SystemGeometry:
    """Build the evenly spaced chain with one detector per site."""
    if n_sites < 2:
        raise InvalidGeometryError(f"need at least 2 sites, got {n_sites}")
    if lattice_r <= 0:
        raise InvalidGeometryError(f"lattice_r must be positive, got {lattice_r}")
    if detector_offset_y == 0:
        warnings.warn("detector_offset_y = 0: detectors coincide with chain atoms", stacklevel=2)
    agg = np.zeros((n_sites, 3))
    agg[:, 0] = lattice_r * np.arange(n_sites)
    det = agg.copy()
    det[:, 1] = detector_offset_y
    return SystemGeometry(n_sites, lattice_r, detector_offset_y, agg, det)


def sample_realization(geom: SystemGeometry, spec: DisorderSpec, index: int) -> SystemGeometry:
    """Disorder realization `index`, a pure function of (spec.seed, index).

    Every atom always consumes one normal draw per coordinate in a fixed
    order, so a given (seed, index, atom, coordinate) slot yields the same
    displacement regardless of which dims are enabled.  Disabled coordinates
    stay bit-identical to the nominal layout.
    """
    rng = np.random.default_rng((spec.seed, index))
    draws = rng.standard_normal((2 * geom.n_sites, 3))
    mask = np.zeros(3)
    for d in spec.dims:
        mask[_AXES[d]] = 1.0
    shift = spec.sigma_trap * draws * mask
    return SystemGeometry(
        geom.n_sites,
        geom.lattice_r,
        geom.detector_offset_y,
        geom.aggregate_pos + shift[: geom.n_sites],
        geom.detector_pos + shift[geom.n_sites:],
    )
