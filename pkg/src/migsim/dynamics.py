"""Fixed-step integration of the reduced master equation.

The reduced model evolves the chain density matrix under the bare exchange
Hamiltonian plus diagonal, probe-dependent level shifts and jump operators.
Because every measurement operator is diagonal in the site basis, the full
dissipator collapses to an elementwise decay/rotation kernel on rho, which
the integrator exploits; batching over disorder realizations happens in the
leading array axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detector import InteractionTable, jump_response, shift_response
from .errors import IntegrationFailureError, InvalidParameterError
from .params import PhysicalParams, crossover_shift

TRACE_TOL = 1e-8
HERMITICITY_TOL = 1e-10
EIGENVALUE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class RunResult:
    """Observables of a single evolution sampled on the output grid."""

    times: np.ndarray        # (T,)
    populations: np.ndarray  # (T, N) site populations rho_nn
    purity: np.ndarray       # (T,)
    final_fidelity: float    # target-site population at the last sample


@dataclass(frozen=True, eq=False)
class BatchResult:
    """Per-realization observables of a batched evolution."""

    times: np.ndarray        # (T,)
    populations: np.ndarray  # (K, T, N)
    purity: np.ndarray       # (K, T)
    ok: np.ndarray           # (K,) bool, invariants held throughout
    breach_time: np.ndarray  # (K,) first breach time, nan where ok
    states: np.ndarray | None = None  # (K, T, N, N) when requested


def purity(rho: np.ndarray) -> float:
    """Tr[rho^2] of a single density matrix."""
    rho = np.asarray(rho)
    return float(np.einsum("ij,ji->", rho, rho).real)


def rate_bound(h_agg: np.ndarray, vbar: np.ndarray, params: PhysicalParams,
               peak_amplitude: float) -> float:
    """Fastest rate the integrator must resolve, rad/us or 1/us.

    Maximum of the Hamiltonian row sums and of the peak jump rate
    |l|^2 = peak^2/gamma_p * |jump_response|^2 over the interaction table.
    """
    h_rate = float(np.abs(h_agg).sum(axis=-1).max()) if h_agg.size else 0.0
    u2_max = float(np.abs(jump_response(vbar, crossover_shift(params))).max() ** 2)
    l_rate = peak_amplitude**2 / params.gamma_p * u2_max
    return max(h_rate, l_rate)


def _dissipation_kernel(vbar: np.ndarray, params: PhysicalParams) -> np.ndarray:
    """Elementwise kernel F with d rho_nm/dt += (sum_a omega_a^2 F[a,n,m]) rho_nm.

    Folds both the diagonal jump operators and the diagonal level shifts:
    the real part damps site coherences at half the distinguishability rate
    |l_n - l_m|^2, the imaginary part rotates them.
    """
    vc = crossover_shift(params)
    u = jump_response(vbar, vc)
    u2 = np.abs(u) ** 2
    diss = (u[..., :, None] * u.conj()[..., None, :]
            - 0.5 * (u2[..., :, None] + u2[..., None, :])) / params.gamma_p
    w = shift_response(vbar, vc)
    shift = -1j * (w[..., :, None] - w[..., None, :]) / params.omega_c**2
    return diss + shift


def evolve_batch(
    rho0: np.ndarray,
    h_agg: np.ndarray,
    vbar: np.ndarray,
    detector_x: np.ndarray,
    probe,
    params: PhysicalParams,
    t_grid: np.ndarray,
    dt: float,
    keep_states: bool = False,
) -> BatchResult:
    """RK4 evolution of a stack of density matrices sharing one probe field.

    rho0, h_agg: (K, N, N); vbar: (K, n_det, N); detector_x: (K, n_det).
    The step size must satisfy dt <= 0.1 / rate_bound(...).  Hermiticity is
    restored after every step; trace, Hermiticity and positivity are checked
    at every output sample and breaches are reported per realization.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 2 or np.any(np.diff(t_grid) <= 0):
        raise InvalidParameterError("t_grid must be strictly increasing with >= 2 points")
    peak = float(getattr(probe, "peak_amplitude", 0.0))
    limit = 0.1 / max(rate_bound(h_agg, vbar, params, peak), 1e-300)
    if dt > limit * (1.0 + 1e-9):
        raise InvalidParameterError(
            f"dt = {dt:.3g} us does not resolve the fastest rate; need dt <= {limit:.3g} us"
        )

    k_batch, n = rho0.shape[0], rho0.shape[-1]
    rho = np.array(rho0, dtype=complex)
    h = np.ascontiguousarray(h_agg.astype(complex))
    kernel = np.ascontiguousarray(_dissipation_kernel(vbar, params).reshape(k_batch, vbar.shape[1], n * n))

    def rhs(t, r):
        om = np.asarray(probe.value(detector_x, t), dtype=float)
        e = ((om * om)[:, None, :] @ kernel).reshape(k_batch, n, n)
        return -1j * (h @ r - r @ h) + e * r

    n_samples = t_grid.size
    populations = np.empty((k_batch, n_samples, n))
    purities = np.empty((k_batch, n_samples))
    states = np.empty((k_batch, n_samples, n, n), dtype=complex) if keep_states else None
    ok = np.ones(k_batch, dtype=bool)
    breach_time = np.full(k_batch, np.nan)

    def record(idx, t):
        if states is not None:
            states[:, idx] = rho
        populations[:, idx, :] = np.einsum("kii->ki", rho).real
        purities[:, idx] = np.einsum("kij,kji->k", rho, rho).real
        trace_dev = np.abs(np.einsum("kii->k", rho) - 1.0)
        herm_dev = np.abs(rho - rho.conj().swapaxes(-1, -2)).max(axis=(-1, -2))
        min_eig = np.linalg.eigvalsh(rho)[:, 0]
        bad = (trace_dev > TRACE_TOL) | (herm_dev > HERMITICITY_TOL) | (min_eig < -EIGENVALUE_TOL)
        newly = bad & ok
        breach_time[newly] = t
        ok[newly] = False

    record(0, t_grid[0])
    for i in range(n_samples - 1):
        t0, t1 = t_grid[i], t_grid[i + 1]
        n_sub = max(1, int(np.ceil((t1 - t0) / dt - 1e-12)))
        hstep = (t1 - t0) / n_sub
        t = t0
        for _ in range(n_sub):
            k1 = rhs(t, rho)
            k2 = rhs(t + 0.5 * hstep, rho + (0.5 * hstep) * k1)
            k3 = rhs(t + 0.5 * hstep, rho + (0.5 * hstep) * k2)
            k4 = rhs(t + hstep, rho + hstep * k3)
            rho += (hstep / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            rho = 0.5 * (rho + rho.conj().swapaxes(-1, -2))
            t += hstep
        record(i + 1, t1)

    return BatchResult(times=t_grid.copy(), populations=populations,
                       purity=purities, ok=ok, breach_time=breach_time, states=states)


def evolve(
    rho0: np.ndarray,
    h_agg: np.ndarray,
    table: InteractionTable,
    probe,
    params: PhysicalParams,
    t_grid: np.ndarray,
    dt: float,
    target_site: int | None = None,
) -> RunResult:
    """Single-realization evolution; raises on any invariant breach."""
    batch = evolve_batch(
        rho0[None], h_agg[None], table.vbar[None], table.detector_x[None],
        probe, params, np.asarray(t_grid, dtype=float), dt,
    )
    if not batch.ok[0]:
        raise IntegrationFailureError(
            f"density-matrix invariant breached at t = {batch.breach_time[0]:.6g} us",
            time=float(batch.breach_time[0]),
        )
    n = rho0.shape[-1]
    target = n if target_site is None else int(target_site)
    if not 1 <= target <= n:
        raise InvalidParameterError(f"target_site {target} outside [1, {n}]")
    return RunResult(
        times=batch.times,
        populations=batch.populations[0],
        purity=batch.purity[0],
        final_fidelity=float(batch.populations[0, -1, target - 1]),
    )
