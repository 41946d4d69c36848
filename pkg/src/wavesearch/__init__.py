"""Database search with amplitudes, coupled oscillators and coherent states."""

from . import coherent, engine, experiments, oscillators, search
from .coherent import CoherentState, TappedCoherentState, tapped_state
from .engine import (
    TapSchedule,
    Trajectory,
    apply_tap,
    evolve_exact,
    evolve_numeric,
    random_stop_gain,
    run_reverse,
    run_search,
    velocity_amplitude_map,
)
from .errors import (
    DegenerateStateError,
    InvalidParameterError,
    MistimedTapError,
    TargetIndexError,
    UnsupportedModeError,
    WaveSearchError,
)
from .oscillators import (
    OscillatorParams,
    PhaseSpaceState,
    family_params,
    initial_conditions,
    max_gain,
    spectral,
    total_energy,
)
from .search import (
    AmplitudeVector,
    grover_iterate,
    optimal_queries,
    reflect_mean,
    reflect_target,
    uniform_state,
)

__version__ = "0.1.0"
