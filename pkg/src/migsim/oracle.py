"""Full detector-resolved master equation on desk-scale systems.

Keeps every detector atom as an explicit three-level ladder coupled to the
chain through its upper-level shift, with spontaneous decay of the
intermediate level as the only jump process.  Tracing out the detectors
gives a reference trajectory against which the reduced model of
:mod:`.dynamics` is validated; the reduction error shrinks quadratically
in the probe-to-coupling ratio.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .aggregate import build_hamiltonian
from .detector import build_interactions
from .errors import DimensionCapError, IntegrationFailureError, InvalidParameterError
from .geometry import SystemGeometry
from .params import PhysicalParams

#: largest full-model Hilbert space accepted by default
DIMENSION_CAP = 162

_TRACE_TOL = 1e-8
_HERMITICITY_TOL = 1e-10
_EIGENVALUE_TOL = 1e-9

# three-level detector ladder: 0 = ground, 1 = intermediate, 2 = upper
_SIGMA_GE = np.zeros((3, 3))
_SIGMA_GE[0, 1] = 1.0
_SIGMA_EU = np.zeros((3, 3))
_SIGMA_EU[1, 2] = 1.0
_PROJ_U = np.diag([0.0, 0.0, 1.0])


@dataclass(frozen=True, eq=False)
class FullModel:
    """Assembled operators of the detector-resolved model."""

    n_sites: int
    detector_sites: tuple   # 1-based chain sites whose detectors are kept
    detector_x: np.ndarray
    dim: int
    h_static: np.ndarray    # chain exchange + coupling drive + interaction shifts
    h_probe: np.ndarray     # (n_det, dim, dim), scaled by omega_p(x_a, t)
    jumps: np.ndarray       # (n_det, dim, dim) decay operators


@dataclass(frozen=True, eq=False)
class ReducedTrajectory:
    """Detector-traced chain state sampled on the output grid."""

    times: np.ndarray
    states: np.ndarray       # (T, N, N)
    populations: np.ndarray  # (T, N)
    purity: np.ndarray       # (T,)


@dataclass(frozen=True, eq=False)
class ModelComparison:
    times: np.ndarray
    trace_distances: np.ndarray
    max_trace_distance: float
    mean_trace_distance: float


def _embed(agg_op: np.ndarray, det_ops: list) -> np.ndarray:
    return reduce(np.kron, [agg_op] + det_ops)


def build_full_model(
    geom: SystemGeometry,
    params: PhysicalParams,
    detector_sites=None,
    cap: int = DIMENSION_CAP,
) -> FullModel:
    """Assemble the chain (x) detector-ladder operators.

    detector_sites selects which per-site detectors are represented
    (defaults to all of them); each adds a factor 3 to the dimension.
    """
    n = geom.n_sites
    sites = tuple(range(1, n + 1)) if detector_sites is None else tuple(detector_sites)
    if any(not 1 <= s <= n for s in sites):
        raise InvalidParameterError(f"detector sites {sites} outside [1, {n}]")
    n_det = len(sites)
    dim = n * 3**n_det
    if dim > cap:
        raise DimensionCapError(
            f"full model dimension {dim} = {n}*3^{n_det} exceeds cap {cap}; "
            "reduce n_sites or the number of detectors"
        )

    table = build_interactions(geom, params)
    idx = [s - 1 for s in sites]
    vbar = table.vbar[idx]
    detector_x = table.detector_x[idx]

    eye_det = [np.eye(3)] * n_det
    h_static = _embed(build_hamiltonian(geom, params), eye_det).astype(complex)
    h_probe = np.empty((n_det, dim, dim), dtype=complex)
    jumps = np.empty((n_det, dim, dim), dtype=complex)
    for a in range(n_det):
        det_ops = list(eye_det)
        det_ops[a] = 0.5 * (_SIGMA_GE + _SIGMA_GE.T)
        h_probe[a] = _embed(np.eye(n), det_ops)
        det_ops[a] = 0.5 * params.omega_c * (_SIGMA_EU + _SIGMA_EU.T)
        h_static += _embed(np.eye(n), det_ops)
        det_ops[a] = _PROJ_U
        for nn in range(n):
            site_proj = np.zeros((n, n))
            site_proj[nn, nn] = 1.0
            h_static += vbar[a, nn] * _embed(site_proj, det_ops)
        det_ops[a] = np.sqrt(params.gamma_p) * _SIGMA_GE
        jumps[a] = _embed(np.eye(n), det_ops)

    return FullModel(
        n_sites=n, detector_sites=sites, detector_x=detector_x,
        dim=dim, h_static=h_static, h_probe=h_probe, jumps=jumps,
    )


def _partial_trace(rho: np.ndarray, n_sites: int) -> np.ndarray:
    d_det = rho.shape[0] // n_sites
    return np.einsum("iaja->ij", rho.reshape(n_sites, d_det, n_sites, d_det))


def full_step_bound(model: FullModel, params: PhysicalParams, peak_amplitude: float) -> float:
    """Largest admissible RK4 step for the assembled full model."""
    rate = float(np.abs(model.h_static).sum(axis=1).max()
                 + peak_amplitude * np.abs(model.h_probe).sum(axis=2).max())
    return 0.1 / max(rate, params.gamma_p)


def evolve_full(
    initial_site: int,
    geom: SystemGeometry,
    params: PhysicalParams,
    probe,
    t_grid: np.ndarray,
    dt: float,
    detector_sites=None,
    cap: int = DIMENSION_CAP,
) -> ReducedTrajectory:
    """Integrate the full master equation from |site> x all-ground.

    Uses the same fixed-step RK4 scheme and invariant budgets as the
    reduced integrator and returns the detector-traced chain state.
    """
    model = build_full_model(geom, params, detector_sites, cap)
    peak = float(getattr(probe, "peak_amplitude", 0.0))
    if peak > 0.5 * params.omega_c * (1 + 1e-12):
        raise InvalidParameterError(
            "full-model runs require omega_p/omega_c <= 0.5 for a meaningful "
            "comparison with the reduced model"
        )
    if not 1 <= initial_site <= model.n_sites:
        raise InvalidParameterError(f"initial site {initial_site} outside [1, {model.n_sites}]")

    t_grid = np.asarray(t_grid, dtype=float)
    limit = full_step_bound(model, params, peak)
    if dt > limit * (1 + 1e-9):
        raise InvalidParameterError(
            f"dt = {dt:.3g} us does not resolve the full model; need dt <= {limit:.3g} us"
        )

    dim = model.dim
    rho = np.zeros((dim, dim), dtype=complex)
    start = (initial_site - 1) * (dim // model.n_sites)
    rho[start, start] = 1.0

    jumps = model.jumps
    jdag = jumps.conj().swapaxes(-1, -2)
    absorb = 0.5 * np.einsum("aij,ajk->ik", jdag, jumps)

    def rhs(t, r):
        om = np.asarray(probe.value(model.detector_x, t), dtype=float)
        h = model.h_static + np.tensordot(om, model.h_probe, axes=1)
        pump = np.einsum("aij,jk,alk->il", jumps, r, jumps.conj())
        return -1j * (h @ r - r @ h) + pump - (absorb @ r + r @ absorb)

    n_samples = t_grid.size
    states = np.empty((n_samples, model.n_sites, model.n_sites), dtype=complex)

    def record(i, t):
        trace_dev = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
        herm_dev = float(np.abs(rho - rho.conj().T).max())
        min_eig = float(np.linalg.eigvalsh(rho)[0])
        if trace_dev > _TRACE_TOL or herm_dev > _HERMITICITY_TOL or min_eig < -_EIGENVALUE_TOL:
            raise IntegrationFailureError(
                f"full-model invariant breached at t = {t:.6g} us", time=t
            )
        states[i] = _partial_trace(rho, model.n_sites)

    record(0, t_grid[0])
    for i in range(n_samples - 1):
        t0, t1 = t_grid[i], t_grid[i + 1]
        n_sub = max(1, int(np.ceil((t1 - t0) / dt - 1e-12)))
        h = (t1 - t0) / n_sub
        t = t0
        for _ in range(n_sub):
            k1 = rhs(t, rho)
            k2 = rhs(t + 0.5 * h, rho + (0.5 * h) * k1)
            k3 = rhs(t + 0.5 * h, rho + (0.5 * h) * k2)
            k4 = rhs(t + h, rho + h * k3)
            rho += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            rho = 0.5 * (rho + rho.conj().T)
            t += h
        record(i + 1, t1)

    pops = np.einsum("tii->ti", states).real
    pur = np.einsum("tij,tji->t", states, states).real
    return ReducedTrajectory(times=t_grid.copy(), states=states, populations=pops, purity=pur)


def trace_distance(rho_a: np.ndarray, rho_b: np.ndarray) -> float:
    """0.5 * trace norm of the Hermitian difference."""
    rho_a = np.asarray(rho_a)
    rho_b = np.asarray(rho_b)
    if rho_a.shape != rho_b.shape:
        raise InvalidParameterError(f"shape mismatch {rho_a.shape} vs {rho_b.shape}")
    return float(0.5 * np.abs(np.linalg.eigvalsh(rho_a - rho_b)).sum())


def compare_models(
    geom: SystemGeometry,
    params: PhysicalParams,
    probe,
    t_grid: np.ndarray,
    dt_full: float,
    dt_reduced: float,
    detector_sites=None,
    initial_site: int = 1,
    cap: int = DIMENSION_CAP,
) -> ModelComparison:
    """Trace distance between full and reduced trajectories on t_grid."""
    from .dynamics import evolve_batch

    full = evolve_full(initial_site, geom, params, probe, t_grid, dt_full,
                       detector_sites=detector_sites, cap=cap)

    table = build_interactions(geom, params)
    sites = tuple(range(1, geom.n_sites + 1)) if detector_sites is None else tuple(detector_sites)
    idx = [s - 1 for s in sites]
    rho0 = np.zeros((geom.n_sites, geom.n_sites), dtype=complex)
    rho0[initial_site - 1, initial_site - 1] = 1.0
    batch = evolve_batch(
        rho0[None], build_hamiltonian(geom, params)[None],
        table.vbar[idx][None], table.detector_x[idx][None],
        probe, params, t_grid, dt_reduced, keep_states=True,
    )
    if not batch.ok[0]:
        raise IntegrationFailureError("reduced model breached invariants during comparison")

    tds = np.array([trace_distance(full.states[i], batch.states[0, i])
                    for i in range(t_grid.size)])
    return ModelComparison(
        times=np.asarray(t_grid, dtype=float).copy(),
        trace_distances=tds,
        max_trace_distance=float(tds.max()),
        mean_trace_distance=float(tds.mean()),
    )
