"""Slow-light control: coupling profile, pulse trajectories, probe fields.

The carrier medium is driven by a spatially structured coupling beam that
is weak at the chain sites and strong in the gaps between them.  Probe
pulses (polaritons) therefore dwell at each detector for one transfer
period and transit the gaps quickly.  The absolute group-velocity scale is
not recoverable from dispersion data alone, so it is calibrated such that
one lattice period is traversed in exactly the transfer period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import CalibrationError, InvalidInstructionError, InvalidParameterError
from .params import C_LIGHT

# Gauss-Legendre nodes/weights (5 point) on [0, 1] for cumulative dwell times
_GL_NODES = (np.polynomial.legendre.leggauss(5)[0] + 1.0) / 2.0
_GL_WEIGHTS = np.polynomial.legendre.leggauss(5)[1] / 2.0

# spatial resolution of trajectory tables, um; fine enough that linear
# interpolation of x(t) stays below 1e-6 of a lattice period
_KNOT_STEP = 0.0025


@dataclass(frozen=True)
class CouplingProfile:
    """Square-wave coupling beam with tanh flanks, bumps centred mid-gap.

    Bumps of half width w sit at (n - 1/2) * lattice_r for n in
    [-2, n_sites + 1], so the profile floor (slow zones) covers every chain
    site plus two virtual staging sites on each side.
    """

    omega_min: float
    omega_max: float
    sigma_c: float
    w: float
    n_sites: int
    lattice_r: float


@dataclass(frozen=True)
class VelocityModel:
    """Group-velocity field v(x) = c * coupling(x)^2 / (coupling(x)^2 + kappa).

    kappa is the collective matter-coupling scale (rad/us)^2 that fixes how
    deeply the medium slows the light.
    """

    kappa: float
    c_light: float = C_LIGHT


@dataclass(frozen=True)
class PolaritonTrain:
    """Gaussian probe pulses launched at fixed x-positions."""

    initial_positions: tuple
    sigma_p: float
    omega_p0: float

    def __post_init__(self):
        if self.sigma_p <= 0:
            raise InvalidParameterError("sigma_p must be positive")


@dataclass(frozen=True)
class SwitchSchedule:
    """Piecewise-constant probe program: (t_start, t_end, sites, amplitude).

    sites are 1-based detector indices active during the interval.
    """

    intervals: tuple

    def __post_init__(self):
        per_site = {}
        for t0, t1, sites, _amp in self.intervals:
            if not t0 < t1:
                raise InvalidInstructionError(f"empty schedule interval [{t0}, {t1}]")
            for s in sites:
                for a0, a1 in per_site.get(s, ()):
                    if t0 < a1 and a0 < t1:
                        raise InvalidInstructionError(
                            f"overlapping activations of detector {s}"
                        )
                per_site.setdefault(s, []).append((t0, t1))

    @property
    def duration(self) -> float:
        return max((t1 for _t0, t1, _s, _a in self.intervals), default=0.0)


def coupling_at(profile: CouplingProfile, x) -> np.ndarray:
    """Coupling Rabi frequency at position(s) x, rad/us."""
    x = np.asarray(x, dtype=float)
    centers = (np.arange(-2, profile.n_sites + 2) - 0.5) * profile.lattice_r
    arg = x[..., None] - centers
    bumps = np.tanh((arg + profile.w) / profile.sigma_c) - np.tanh((arg - profile.w) / profile.sigma_c)
    return profile.omega_min + 0.5 * (profile.omega_max - profile.omega_min) * bumps.sum(axis=-1)


def group_velocity(vm: VelocityModel, profile: CouplingProfile, x) -> np.ndarray:
    """Local group velocity, um/us; between 0 (dark) and c (vacuum)."""
    if vm.kappa < 0:
        raise InvalidParameterError("kappa must be non-negative")
    om2 = coupling_at(profile, x) ** 2
    return vm.c_light * om2 / (om2 + vm.kappa)


def _lattice_dwell_integral(profile: CouplingProfile) -> float:
    """integral of coupling(x)^-2 over one bulk lattice period [0, R]."""
    edges = np.linspace(0.0, profile.lattice_r, 4001)
    h = edges[1] - edges[0]
    pts = edges[:-1, None] + h * _GL_NODES
    vals = coupling_at(profile, pts) ** -2
    return float(h * (vals @ _GL_WEIGHTS).sum())


def calibrate_velocity(
    profile: CouplingProfile,
    target_period: float,
    c_light: float = C_LIGHT,
) -> VelocityModel:
    """Choose kappa so one lattice period is traversed in target_period.

    Solves integral_0^R dx / v(x) = target_period by bracketed root finding
    to 1e-9 relative accuracy.
    """
    if target_period <= 0:
        raise InvalidParameterError("target_period must be positive")
    if profile.omega_min <= 0:
        raise CalibrationError("profile floor must be positive for finite dwell times")
    i2 = _lattice_dwell_integral(profile)
    # traversal time is R/c + kappa*i2/c, so this estimate is essentially exact
    estimate = (target_period * c_light - profile.lattice_r) / i2
    if estimate <= 0:
        raise CalibrationError(
            f"target_period {target_period} is shorter than the vacuum transit"
        )

    def residual(kappa):
        return (profile.lattice_r + kappa * i2) / c_light - target_period

    lo, hi = 0.5 * estimate, 2.0 * estimate
    if residual(lo) > 0 or residual(hi) < 0:
        raise CalibrationError("no kappa bracket for the requested period")
    kappa = brentq(residual, lo, hi, rtol=1e-12)
    return VelocityModel(kappa=kappa, c_light=c_light)


@lru_cache(maxsize=8)
def _trajectory_table(profile: CouplingProfile, vm: VelocityModel, x_lo: float, x_hi: float):
    """Cumulative traversal time t(x) on a dense grid over [x_lo, x_hi].

    t(x) is strictly increasing (v > 0 everywhere), so pulse trajectories
    follow by inverse interpolation; per-interval 5-point quadrature keeps
    the table exact to far below the 1e-6/period budget.
    """
    n = max(int(math.ceil((x_hi - x_lo) / _KNOT_STEP)), 8)
    edges = np.linspace(x_lo, x_hi, n + 1)
    h = edges[1] - edges[0]
    pts = edges[:-1, None] + h * _GL_NODES
    om2 = coupling_at(profile, pts) ** 2
    inv_v = (om2 + vm.kappa) / (vm.c_light * om2)
    seg = h * (inv_v @ _GL_WEIGHTS)
    t_knots = np.concatenate(([0.0], np.cumsum(seg)))
    return edges, t_knots


class _TrajectoryMap:
    """Vectorized x(t) for every pulse moving through a shared velocity field."""

    def __init__(self, profile, vm, launch_positions, t_max):
        launch = np.asarray(launch_positions, dtype=float)
        period = profile.lattice_r
        # generous forward extent: slow zones advance one period per dwell
        dwell = _lattice_dwell_integral(profile) * vm.kappa / vm.c_light
        n_periods = t_max / max(dwell, 1e-30) + 3.0
        x_lo = float(launch.min()) - 1.0
        x_hi = float(launch.max()) + n_periods * period + 2.0
        self.x_knots, self.t_knots = _trajectory_table(profile, vm, x_lo, x_hi)
        self.t_offsets = np.interp(launch, self.x_knots, self.t_knots)
        self.t_max = self.t_knots[-1] - self.t_offsets.max()

    def positions(self, t) -> np.ndarray:
        """Pulse x-positions at time(s) t; shape (..., n_pulses)."""
        t = np.asarray(t, dtype=float)
        return np.interp(t[..., None] + self.t_offsets, self.t_knots, self.x_knots)


def propagate_train(train: PolaritonTrain, vm: VelocityModel, profile: CouplingProfile, t):
    """Pulse centre positions at time(s) t from dx/dt = v(x)."""
    t_arr = np.asarray(t, dtype=float)
    tmap = _TrajectoryMap(profile, vm, train.initial_positions, float(t_arr.max()) if t_arr.size else 0.0)
    return tmap.positions(t_arr)


class TrainProbe:
    """Probe amplitude from a train of Gaussian pulses riding the velocity field.

    value(x, t) sums omega_p0 * exp(-(x - x_n(t))^2 / (2 sigma_p^2)) over
    pulses, using only the x-coordinate; the detector y-offset does not
    attenuate the probe.
    """

    def __init__(self, train: PolaritonTrain, vm: VelocityModel, profile: CouplingProfile, t_max: float):
        self.train = train
        self.vm = vm
        self.profile = profile
        self._map = _TrajectoryMap(profile, vm, train.initial_positions, t_max)

    @property
    def peak_amplitude(self) -> float:
        return self.train.omega_p0

    def pulse_positions(self, t) -> np.ndarray:
        return self._map.positions(t)

    def value(self, x, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        centers = self._map.positions(t)
        gauss = np.exp(-((x[..., None] - centers) ** 2) / (2.0 * self.train.sigma_p**2))
        return self.train.omega_p0 * gauss.sum(axis=-1)


class ScheduleProbe:
    """Probe amplitude from a switching program, constant over each detector.

    A position maps to the nearest nominal site (within half a lattice
    spacing) so that schedule- and train-backed probes expose the same
    value(x, t) contract to the dynamics.
    """

    def __init__(self, schedule: SwitchSchedule, lattice_r: float, n_sites: int):
        self.schedule = schedule
        self.lattice_r = lattice_r
        self.n_sites = n_sites

    @property
    def peak_amplitude(self) -> float:
        return max((amp for _t0, _t1, _s, amp in self.schedule.intervals), default=0.0)

    def value(self, x, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        site = np.rint(x / self.lattice_r).astype(int) + 1
        near = np.abs(x - (site - 1) * self.lattice_r) <= 0.5 * self.lattice_r
        ok = near & (site >= 1) & (site <= self.n_sites)
        out = np.zeros(x.shape)
        for t0, t1, sites, amp in self.schedule.intervals:
            if t0 <= t < t1:
                out += np.where(ok & np.isin(site, tuple(sites)), amp, 0.0)
        return out


_SWITCH_OPS = ("OFF", "ON_L", "ON_R")


def compile_switch(ops, t_period: float, amplitude: float, n_sites: int) -> SwitchSchedule:
    """Compile (op, site[, duration]) instructions into a SwitchSchedule.

    OFF(n) holds the exciton at n by measuring both neighbours for the
    given duration.  ON_L(n)/ON_R(n) transfer it one site left/right in
    exactly t_period by measuring every site except the pair involved,
    which also suppresses beyond-nearest-neighbour leakage.
    """
    intervals = []
    t = 0.0
    expected_site = None
    for k, instr in enumerate(ops):
        op, site, duration = _normalize_instruction(instr, k)
        if not 1 <= site <= n_sites:
            raise InvalidInstructionError(f"instruction {k}: site {site} outside [1, {n_sites}]")
        if expected_site is not None and site != expected_site:
            raise InvalidInstructionError(
                f"instruction {k}: exciton is at site {expected_site}, not {site}"
            )
        if op == "OFF":
            if duration is None:
                raise InvalidInstructionError(f"instruction {k}: OFF requires a duration")
            active = {site - 1, site + 1} & set(range(1, n_sites + 1))
            expected_site = site
        else:
            if duration is not None:
                raise InvalidInstructionError(
                    f"instruction {k}: {op} duration is fixed at the transfer period"
                )
            duration = t_period
            if op == "ON_R":
                if site == n_sites:
                    raise InvalidInstructionError(f"instruction {k}: ON_R impossible at site {n_sites}")
                free = {site, site + 1}
                expected_site = site + 1
            else:
                if site == 1:
                    raise InvalidInstructionError(f"instruction {k}: ON_L impossible at site 1")
                free = {site, site - 1}
                expected_site = site - 1
            active = set(range(1, n_sites + 1)) - free
        intervals.append((t, t + duration, frozenset(active), amplitude))
        t += duration
    return SwitchSchedule(intervals=tuple(intervals))


def _normalize_instruction(instr, k):
    parts = tuple(instr)
    if len(parts) == 2:
        op, site = parts
        duration = None
    elif len(parts) == 3:
        op, site, duration = parts
    else:
        raise InvalidInstructionError(f"instruction {k}: expected (op, site[, duration])")
    if op not in _SWITCH_OPS:
        raise InvalidInstructionError(f"instruction {k}: unknown op {op!r}")
    return op, int(site), duration


def parse_schedule(text: str):
    """Parse `<op> <site> [duration_us]` lines into an instruction list."""
    ops = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise InvalidInstructionError(f"line {ln}: expected '<op> <site> [duration_us]'")
        op = parts[0].upper()
        try:
            site = int(parts[1])
            duration = float(parts[2]) if len(parts) == 3 else None
        except ValueError as exc:
            raise InvalidInstructionError(f"line {ln}: {exc}") from exc
        ops.append((op, site) if duration is None else (op, site, duration))
    return ops
