"""Detector-chain interactions and the reduced measurement operators.

A detector atom placed between the two absorption-shadow radii feels a
strong van der Waals shift from a p-excited neighbour and a weak one from
s-state atoms.  The shift breaks the detector's EIT and turns it into a
state-selective measurement of the exciton position, described here by
diagonal effective Hamiltonian and jump operators on the chain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, SingularGeometryError
from .geometry import SystemGeometry
from .params import PhysicalParams, crossover_shift

_MIN_SEPARATION = 1e-9


@dataclass(frozen=True, eq=False)
class InteractionTable:
    """Net detector-chain shifts and the detector x-positions they belong to.

    vbar[a, n] is the total shift of detector a's upper level when the
    exciton occupies site n, in rad/us.
    """

    vbar: np.ndarray        # (n_det, n_sites)
    detector_x: np.ndarray  # (n_det,)


@dataclass(frozen=True, eq=False)
class EffectiveOperators:
    """Diagonals of the reduced operators at one instant."""

    h_diag: np.ndarray  # (n_sites,) real, rad/us
    l_diag: np.ndarray  # (n_det, n_sites) complex, sqrt(rad/us)


def build_interactions(geom: SystemGeometry, params: PhysicalParams) -> InteractionTable:
    """Tabulate vbar[a, n] = C4p/|r_a - r_n|^4 + sum_{m != n} C6s/|r_a - r_m|^6."""
    det = geom.detector_pos
    agg = geom.aggregate_pos
    diff = det[:, None, :] - agg[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    if dist.min() < _MIN_SEPARATION:
        a, n = divmod(int(np.argmin(dist)), agg.shape[0])
        raise SingularGeometryError(f"detector {a + 1} coincides with chain atom {n + 1}")
    v4 = params.c4_p / dist**4
    v6 = params.c6_s / dist**6
    # exciton on n: p-term from atom n plus s-terms from every other atom
    vbar = v4 + (v6.sum(axis=1, keepdims=True) - v6)
    return InteractionTable(vbar=vbar, detector_x=det[:, 0].copy())


def shadow_radius(coefficient: float, eta: int, params: PhysicalParams) -> float:
    """Distance at which a chain atom's shift reaches the crossover scale.

    (|C| / crossover_shift)**(1/eta) with eta = 4 for the p-state
    coefficient and eta = 6 for the s-state one.
    """
    if eta not in (4, 6):
        raise InvalidParameterError(f"eta must be 4 or 6, got {eta}")
    return (abs(coefficient) / crossover_shift(params)) ** (1.0 / eta)


def jump_response(vbar: np.ndarray, vc: float) -> np.ndarray:
    """Complex response 1/(i + vc/vbar), exactly zero where vbar is zero.

    The squared magnitude is the fraction of the maximal jump rate the
    detector realizes at shift vbar; it grows monotonically with |vbar|.
    """
    vbar = np.asarray(vbar, dtype=float)
    out = np.zeros(vbar.shape, dtype=complex)
    nz = vbar != 0
    out[nz] = 1.0 / (1j + vc / vbar[nz])
    return out


def shift_response(vbar: np.ndarray, vc: float) -> np.ndarray:
    """Level-shift kernel vbar / (1 + (vbar/vc)^2); vanishes for |vbar| >> vc."""
    vbar = np.asarray(vbar, dtype=float)
    return vbar / (1.0 + (vbar / vc) ** 2)


def effective_operators(
    table: InteractionTable,
    probe,
    params: PhysicalParams,
    t: float,
) -> EffectiveOperators:
    """Evaluate the reduced operators with the instantaneous probe field.

    h_diag[n]    = sum_a (omega_p(x_a, t)^2 / omega_c^2) * shift_response(vbar[a, n])
    l_diag[a, n] = -(omega_p(x_a, t) / sqrt(gamma_p)) * jump_response(vbar[a, n])
    """
    vc = crossover_shift(params)
    omega_p = np.asarray(probe.value(table.detector_x, t), dtype=float)
    h_diag = (omega_p[:, None] ** 2 / params.omega_c**2 * shift_response(table.vbar, vc)).sum(axis=0)
    l_diag = -(omega_p[:, None] / np.sqrt(params.gamma_p)) * jump_response(table.vbar, vc)
    return EffectiveOperators(h_diag=h_diag, l_diag=l_diag)
