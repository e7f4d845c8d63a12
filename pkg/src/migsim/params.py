"""Physical parameters and unit conventions.

Internal units are fixed to micrometres for length, microseconds for time,
and rad/us for every Rabi frequency and rate.  Spectroscopic inputs quoted
as "value/2pi" in MHz or kHz are converted on entry and never stored in
their quoted form, which keeps all rates O(1)-O(1e4) and unit bugs out of
the dynamics code.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import InvalidParameterError, UnitTagError

TWO_PI = 2.0 * math.pi

#: vacuum speed of light in um/us
C_LIGHT = 2.99792458e8

# unit tag -> factor taking the quoted magnitude to internal units
_UNIT_SCALES = {
    "per2pi_MHz": TWO_PI,        # v (MHz, /2pi quoted) -> 2*pi*v rad/us
    "per2pi_kHz": TWO_PI * 1e-3,
    "um": 1.0,
    "us": 1.0,
    "dimensionless": 1.0,
}

UNIT_TAGS = tuple(_UNIT_SCALES)


def from_paper_units(value: float, tag: str) -> float:
    """Convert a quoted magnitude with unit tag to internal units."""
    try:
        return value * _UNIT_SCALES[tag]
    except KeyError:
        raise UnitTagError(f"unknown unit tag {tag!r}; expected one of {UNIT_TAGS}")


def to_paper_units(value: float, tag: str) -> float:
    """Inverse of :func:`from_paper_units`."""
    try:
        return value / _UNIT_SCALES[tag]
    except KeyError:
        raise UnitTagError(f"unknown unit tag {tag!r}; expected one of {UNIT_TAGS}")


@dataclass(frozen=True)
class PhysicalParams:
    """Dispersion coefficients and EIT drive parameters, internal units.

    c3        exciton hopping coefficient, rad/us * um^3
    c6_s      van der Waals coefficient of the detector state against an
              s-state chain atom (signed), rad/us * um^6
    c4_p      same against the p-excited atom (signed), rad/us * um^4
    omega_p0  peak probe Rabi frequency seen by detector atoms, rad/us
    omega_c   EIT coupling Rabi frequency on the detector atoms, rad/us
    gamma_p   spontaneous decay rate of the intermediate detector level, rad/us
    probe_ratio  amplitude ratio between the detector-atom probe and the
              carrier-atom probe (dimensionless)
    """

    c3: float
    c6_s: float
    c4_p: float
    omega_p0: float
    omega_c: float
    gamma_p: float
    probe_ratio: float = 2.5

    def __post_init__(self):
        if self.omega_c <= 0:
            raise InvalidParameterError("omega_c must be positive")
        if self.gamma_p <= 0:
            raise InvalidParameterError("gamma_p must be positive")
        if self.omega_p0 < 0:
            raise InvalidParameterError("omega_p0 must be non-negative")
        ratio = self.omega_p0 / self.omega_c
        if ratio >= 1.0:
            raise InvalidParameterError(
                f"omega_p0/omega_c = {ratio:.3g} >= 1 is outside the regime "
                "where the reduced detector model applies"
            )
        if ratio > 0.5:
            warnings.warn(
                f"omega_p0/omega_c = {ratio:.3g} > 0.5; the reduced detector "
                "model degrades quadratically in this ratio",
                stacklevel=2,
            )


def crossover_shift(params: PhysicalParams) -> float:
    """Interaction shift at which the detector jump rate reaches half maximum.

    Equals omega_c**2 / (2 * gamma_p); shifts far above it saturate the
    measurement, shifts far below it leave the detector transparent.
    """
    if params.gamma_p <= 0:
        raise InvalidParameterError("gamma_p must be positive")
    return params.omega_c**2 / (2.0 * params.gamma_p)
