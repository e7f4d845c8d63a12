"""Measurement-guided exciton transport on Rydberg chains.

A chain of strongly interacting atoms hosts a single hopping excitation;
detector atoms flanking each site turn into state-selective measurements
whenever a slow-light probe pulse dwells next to them.  Synchronizing the
pulse motion with the hopping period steers the excitation site by site.
"""

__version__ = "0.1.0"

from .aggregate import build_hamiltonian, rabi_period
from .detector import (
    EffectiveOperators,
    InteractionTable,
    build_interactions,
    effective_operators,
    shadow_radius,
)
from .dynamics import RunResult, evolve, evolve_batch, purity
from .geometry import DisorderSpec, SystemGeometry, nominal_geometry, sample_realization
from .montecarlo import EnsembleResult, PreparedScenario, merge_ensembles, run_ensemble
from .oracle import compare_models, evolve_full, trace_distance
from .params import C_LIGHT, PhysicalParams, crossover_shift, from_paper_units, to_paper_units
from .polariton import (
    CouplingProfile,
    PolaritonTrain,
    ScheduleProbe,
    SwitchSchedule,
    TrainProbe,
    VelocityModel,
    calibrate_velocity,
    compile_switch,
    coupling_at,
    group_velocity,
    propagate_train,
)
from .scenarios import ScenarioConfig, load_config, parse_config, prepare, preset, serialize_config

__all__ = [name for name in dir() if not name.startswith("_")]
