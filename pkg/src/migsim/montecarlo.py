"""Disorder-averaged ensembles with deterministic seeding.

Realizations are independent work units: realization i perturbs the
nominal layout with :func:`geometry.sample_realization(..., i)` and runs
the same probe program.  Batches of realizations are integrated together
through the vectorized integrator; aggregation is a commutative,
associative reduction so partial ensembles merge exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aggregate import build_hamiltonian
from .detector import build_interactions
from .dynamics import evolve_batch
from .errors import EnsembleError, InvalidParameterError
from .geometry import DisorderSpec, SystemGeometry, sample_realization
from .params import PhysicalParams

#: realizations integrated per vectorized batch
DEFAULT_CHUNK = 128


@dataclass(frozen=True, eq=False)
class PreparedScenario:
    """Everything needed to run one realization: layout, drive, and grids."""

    name: str
    geometry: SystemGeometry  # nominal layout; disorder is applied per realization
    params: PhysicalParams
    probe: object             # value(x, t) contract
    t_grid: np.ndarray
    dt: float
    initial_site: int
    target_site: int


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Disorder-averaged observables plus per-realization fidelities."""

    times: np.ndarray
    final_fidelities: np.ndarray  # (n_ok,) successful realizations only
    mean_populations: np.ndarray  # (T, N)
    mean_purity: np.ndarray       # (T,)
    mean_fidelity: float
    stderr_fidelity: float
    count: int                    # requested realization count
    master_seed: int
    failed_indices: tuple


def _initial_state(n_sites: int, site: int) -> np.ndarray:
    rho = np.zeros((n_sites, n_sites), dtype=complex)
    rho[site - 1, site - 1] = 1.0
    return rho


def run_realizations(
    prepared: PreparedScenario,
    disorder: DisorderSpec,
    indices,
    keep_states: bool = False,
):
    """Integrate the given realization indices as one vectorized batch."""
    geoms = [sample_realization(prepared.geometry, disorder, i) for i in indices]
    h_agg = np.stack([build_hamiltonian(g, prepared.params) for g in geoms])
    tables = [build_interactions(g, prepared.params) for g in geoms]
    vbar = np.stack([t.vbar for t in tables])
    det_x = np.stack([t.detector_x for t in tables])
    rho0 = np.stack([_initial_state(prepared.geometry.n_sites, prepared.initial_site)] * len(geoms))
    return evolve_batch(rho0, h_agg, vbar, det_x, prepared.probe,
                        prepared.params, prepared.t_grid, prepared.dt,
                        keep_states=keep_states)


def run_ensemble(
    prepared: PreparedScenario,
    disorder: DisorderSpec,
    count: int,
    chunk_size: int = DEFAULT_CHUNK,
    persist=None,
    start_index: int = 0,
) -> EnsembleResult:
    """Average realizations start_index .. start_index+count-1 of a scenario.

    Any realization that breaches an integrator invariant is excluded from
    the averages and reported; more than 1% failures aborts the ensemble.
    `persist`, when given, is called as persist(index, times, populations,
    purity) for every successful realization.  Partial ensembles over
    disjoint index ranges merge exactly via :func:`merge_ensembles`.
    """
    if count < 1:
        raise InvalidParameterError("count must be >= 1")
    n_sites = prepared.geometry.n_sites
    t_grid = prepared.t_grid
    pop_sum = np.zeros((t_grid.size, n_sites))
    pur_sum = np.zeros(t_grid.size)
    fidelities = []
    failed = []

    for start in range(start_index, start_index + count, chunk_size):
        indices = range(start, min(start + chunk_size, start_index + count))
        batch = run_realizations(prepared, disorder, indices)
        for j, idx in enumerate(indices):
            if not batch.ok[j]:
                failed.append(idx)
                continue
            pop_sum += batch.populations[j]
            pur_sum += batch.purity[j]
            fidelities.append(batch.populations[j, -1, prepared.target_site - 1])
            if persist is not None:
                persist(idx, t_grid, batch.populations[j], batch.purity[j])

    if len(failed) > 0.01 * count:
        raise EnsembleError(
            f"{len(failed)}/{count} realizations breached integrator invariants: "
            f"indices {failed[:10]}{'...' if len(failed) > 10 else ''}"
        )
    n_ok = count - len(failed)
    fid = np.array(fidelities)
    stderr = float(fid.std(ddof=1) / np.sqrt(n_ok)) if n_ok > 1 else 0.0
    return EnsembleResult(
        times=t_grid.copy(),
        final_fidelities=fid,
        mean_populations=pop_sum / n_ok,
        mean_purity=pur_sum / n_ok,
        mean_fidelity=float(fid.mean()),
        stderr_fidelity=stderr,
        count=count,
        master_seed=disorder.seed,
        failed_indices=tuple(failed),
    )


def merge_ensembles(a: EnsembleResult, b: EnsembleResult) -> EnsembleResult:
    """Combine two disjoint partial ensembles of the same scenario."""
    if a.master_seed != b.master_seed:
        raise InvalidParameterError("cannot merge ensembles with different master seeds")
    if a.times.shape != b.times.shape or not np.array_equal(a.times, b.times):
        raise InvalidParameterError("cannot merge ensembles with different output grids")
    na, nb = a.final_fidelities.size, b.final_fidelities.size
    fid = np.concatenate([a.final_fidelities, b.final_fidelities])
    n_ok = na + nb
    stderr = float(fid.std(ddof=1) / np.sqrt(n_ok)) if n_ok > 1 else 0.0
    return EnsembleResult(
        times=a.times.copy(),
        final_fidelities=fid,
        mean_populations=(a.mean_populations * na + b.mean_populations * nb) / n_ok,
        mean_purity=(a.mean_purity * na + b.mean_purity * nb) / n_ok,
        mean_fidelity=float(fid.mean()),
        stderr_fidelity=stderr,
        count=a.count + b.count,
        master_seed=a.master_seed,
        failed_indices=a.failed_indices + b.failed_indices,
    )
