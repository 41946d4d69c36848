"""Time evolution of the coupled register and the tapping oracle.

Two independent evolution paths are provided.  :func:`evolve_exact` rotates
each normal mode in closed form; :func:`evolve_numeric` integrates the
equations of motion with a fixed-step symmetric splitting scheme and is the
only path that handles damping.  Searches alternate taps with evolution over
the family's half period.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import oscillators as osc
from .errors import (
    DegenerateStateError,
    InvalidParameterError,
    MistimedTapError,
    TargetIndexError,
    UnsupportedModeError,
)
from .oscillators import GainReport, LinearSystem, OscillatorParams, PhaseSpaceState
from .search import AmplitudeVector, target_angle

__all__ = [
    "TapSchedule",
    "Trajectory",
    "evolve_exact",
    "evolve_numeric",
    "integrate_numeric",
    "apply_tap",
    "tap_interval",
    "run_search",
    "run_reverse",
    "velocity_amplitude_map",
    "random_stop_gain",
    "next_zero_displacement",
]

_ZERO_FREQ = 1e-9
DEFAULT_TAP_RTOL = 1e-6


@dataclass(frozen=True)
class TapSchedule:
    interval: float
    count: int
    targets: tuple
    variant: str = "standard"

    def __post_init__(self):
        if not self.interval > 0:
            raise InvalidParameterError(f"tap interval must be > 0, got {self.interval}", "dt")
        if int(self.count) != self.count or self.count < 0:
            raise InvalidParameterError(f"tap count must be >= 0, got {self.count}", "q")
        targets = tuple(int(i) for i in np.atleast_1d(self.targets))
        if not targets:
            raise TargetIndexError("tap schedule needs at least one target")
        if self.variant not in ("standard", "complement"):
            raise InvalidParameterError(f"unknown tap variant {self.variant!r}", "variant")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "count", int(self.count))


@dataclass
class Trajectory:
    """Samples of a run.  ``tap_instant[i]`` marks samples taken at tap times."""

    times: np.ndarray
    states: list
    energies: list
    register_energy: np.ndarray
    target_fraction: np.ndarray
    tap_instant: np.ndarray
    targets: tuple
    n_taps: int = 0
    extras: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.states)

    @property
    def final(self) -> PhaseSpaceState:
        return self.states[-1]

    def at_taps(self):
        """Indices of the samples recorded at tap instants."""
        return np.flatnonzero(self.tap_instant)

    def kinetic_fractions(self, index=-1):
        """Per-oscillator share of register kinetic energy at one sample."""
        v = self.states[index].small_vel
        masses = self.extras.get("small_masses")
        ke = v**2 if masses is None else masses * v**2
        return ke / ke.sum()


# ---------------------------------------------------------------- evolution


def _rotate(x, v, omega, t):
    if omega < _ZERO_FREQ:
        return x + v * t, v
    c, s = math.cos(omega * t), math.sin(omega * t)
    return x * c + v * s / omega, -x * omega * s + v * c


def evolve_exact(state: PhaseSpaceState, params: OscillatorParams, dt: float, target: int = 0):
    """Advance an undamped state by ``dt`` using the normal-mode solution.

    The (Y, ybar) block is projected on the eigenvectors e+ and e-; the target
    relative coordinate and every residual x_i - xbar rotate at unit
    frequency.  A zero-frequency e- mode moves as a free translation.
    """
    if params.damping > 0:
        raise UnsupportedModeError("closed-form evolution is undamped; use evolve_numeric")
    if dt < 0:
        raise InvalidParameterError(f"dt must be >= 0, got {dt}", "dt")
    if dt == 0:
        return state
    spec = osc.spectral(params)
    modes = osc.to_modes(state, target, params)
    pos = np.array([modes.Y, modes.ybar])
    vel = np.array([modes.Y_dot, modes.ybar_dot])
    new_pos = np.zeros(2)
    new_vel = np.zeros(2)
    for coeff, omega in ((spec.coeff_plus, spec.omega_plus), (spec.coeff_minus, spec.omega_minus)):
        u = coeff / np.linalg.norm(coeff)
        a, b = _rotate(u @ pos, u @ vel, omega, dt)
        new_pos += a * u
        new_vel += b * u
    y_t, y_t_dot = _rotate(modes.y_t, modes.y_t_dot, spec.omega_t, dt)
    res, res_dot = _rotate(modes.residuals, modes.residual_vels, 1.0, dt)
    out = osc.ModeState(
        new_pos[0], new_vel[0], new_pos[1], new_vel[1], y_t, y_t_dot,
        res, res_dot, modes.target, modes.big_mass, state.time + dt,
    )
    return osc.from_modes(out)


_YOSHIDA_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_YOSHIDA_W0 = 1.0 - 2.0 * _YOSHIDA_W1


def _leapfrog(system: LinearSystem, q, v, h):
    # drag is integrated exactly in two half-step factors around the kick-drift-kick
    decay = math.exp(-0.5 * system.damping * h)
    v = v * decay
    v = v + 0.5 * h * system.acceleration(q)
    q = q + h * v
    v = v + 0.5 * h * system.acceleration(q)
    return q, v * decay


def _step(system, q, v, h, order):
    if order == 2:
        return _leapfrog(system, q, v, h)
    for w in (_YOSHIDA_W1, _YOSHIDA_W0, _YOSHIDA_W1):
        q, v = _leapfrog(system, q, v, w * h)
    return q, v


def _propagator(system: LinearSystem, h: float, n_steps: int, order: int):
    """Matrix of ``n_steps`` integrator steps acting on (q, v).

    The system is linear, so one step is assembled by stepping the identity
    columns and then raised to the required power.
    """
    dim = system.masses.size
    eye = np.eye(dim)
    zero = np.zeros((dim, dim))
    q = np.hstack([eye, zero])
    v = np.hstack([zero, eye])
    q, v = _step(system, q, v, h, order)
    one = np.vstack([q, v])
    return np.linalg.matrix_power(one, n_steps)


def _steps_for(dt, step_size):
    if not step_size > 0:
        raise InvalidParameterError(f"step_size must be > 0, got {step_size}", "step")
    if dt < 0:
        raise InvalidParameterError(f"dt must be >= 0, got {dt}", "dt")
    n = max(1, math.ceil(dt / step_size - 1e-9))
    return n, dt / n


def _system_for(params, system):
    return osc.build_system(params) if system is None else system


def evolve_numeric(state, params, dt, step_size=1e-3, system=None, order=4):
    """Integrate the equations of motion (with drag) over ``dt``.

    A fixed step no larger than ``step_size`` is used.  ``order=4`` composes
    three kick-drift-kick steps (Yoshida triple jump); ``order=2`` is plain
    velocity Verlet.  Both are symmetric, hence time-reversible when
    undamped.  ``system`` overrides the uniform constants of ``params``.
    """
    system = _system_for(params, system)
    n, h = _steps_for(dt, step_size)
    if dt == 0:
        return state
    prop = _propagator(system, h, n, order)
    q, v = state.as_vectors()
    out = prop @ np.concatenate([q, v])
    dim = q.size
    return PhaseSpaceState.from_vectors(out[:dim], out[dim:], state.time + dt)


def integrate_numeric(state, params, duration, step_size=1e-3, stride=1, system=None, order=4):
    """Dense numeric trajectory sampled every ``stride`` steps.

    Returns ``(times, positions, velocities)`` with arrays of shape
    (n_samples, N+1); column 0 is the big oscillator.
    """
    system = _system_for(params, system)
    n, h = _steps_for(duration, step_size)
    stride = max(1, int(stride))
    n_samples = n // stride
    prop = _propagator(system, h, stride, order)
    q, v = state.as_vectors()
    dim = q.size
    y = np.concatenate([q, v])
    out = np.empty((n_samples + 1, 2 * dim))
    out[0] = y
    for i in range(1, n_samples + 1):
        y = prop @ y
        out[i] = y
    times = state.time + h * stride * np.arange(n_samples + 1)
    return times, out[:, :dim], out[:, dim:]


# ---------------------------------------------------------------- oracle


def _internal_displacement(state: PhaseSpaceState, system: LinearSystem | None):
    q, _ = state.as_vectors()
    if system is not None and system.springs[0] == 0:
        # a free big oscillator lets the whole register drift rigidly; forces
        # depend only on x_i - X, so the wall is taken in the drifting frame
        q = q - np.dot(system.masses, q) / system.masses.sum()
    return float(np.max(np.abs(q)))


def default_tolerance(state: PhaseSpaceState, rtol: float = DEFAULT_TAP_RTOL) -> float:
    """Displacement allowed at a tap: ``rtol`` times velocity scale times 2 pi."""
    _, v = state.as_vectors()
    scale = float(np.max(np.abs(v)))
    return rtol * scale * 2 * math.pi if scale > 0 else 1e-12


def apply_tap(state, targets, variant="standard", *, params=None, system=None,
              tolerance=None, check=True):
    """Elastic reflection of the tapped oscillators (velocity sign flip).

    ``variant="complement"`` reflects every oscillator except ``targets``.
    The tap is only legal when all displacements vanish; otherwise
    :class:`MistimedTapError` is raised unless ``check`` is False.
    """
    n = state.n_items
    idx = np.unique(np.atleast_1d(targets))
    if idx.size == 0 or not np.issubdtype(idx.dtype, np.integer) or idx.min() < 0 or idx.max() >= n:
        raise TargetIndexError(f"target {targets!r} out of range for N={n}")
    if check:
        if system is None and params is not None:
            system = osc.build_system(params)
        tol = default_tolerance(state) if tolerance is None else tolerance
        disp = _internal_displacement(state, system)
        if disp > tol:
            raise MistimedTapError(disp, tol, state.time)
    flip = np.zeros(n, dtype=bool)
    flip[idx] = True
    if variant == "complement":
        flip = ~flip
    elif variant != "standard":
        raise InvalidParameterError(f"unknown tap variant {variant!r}", "variant")
    vel = np.where(flip, -state.small_vel, state.small_vel)
    return state.replace(small_vel=vel)


def tap_interval(params: OscillatorParams) -> float:
    """Half period of the tuned system: pi for family B, 2 pi for family A."""
    spec = osc.spectral(params)
    wp, wm = spec.omega_plus, spec.omega_minus

    def near_int(x):
        return abs(x - round(x)) < 1e-9

    if wm < 1e-9 and near_int(wp) and round(wp) % 2 == 0:
        return math.pi
    if near_int(wp - 0.5) and near_int(wm - 0.5):
        return 2 * math.pi
    raise InvalidParameterError(
        f"no tap interval for untuned frequencies w+={wp:.6g}, w-={wm:.6g}", "dt"
    )


def next_zero_displacement(state, params, index, t_max):
    """Debug helper: first time in (0, t_max] where x_index crosses zero."""
    def x_at(t):
        return evolve_exact(state, params, t).small_pos[index]

    grid = np.linspace(0.0, t_max, 256)[1:]
    prev_t, prev_x = 0.0, x_at(1e-12)
    for t in grid:
        x = x_at(t)
        if x == 0.0:
            return float(t)
        if np.sign(x) != np.sign(prev_x):
            return float(brentq(x_at, prev_t, t, xtol=1e-14))
        prev_t, prev_x = t, x
    return None


# ---------------------------------------------------------------- runs


def _make_evolver(params, method, step_size, system, order, target):
    if method == "exact":
        if system is not None:
            raise UnsupportedModeError("custom per-oscillator constants need method='numeric'")
        return lambda s, dt: evolve_exact(s, params, dt, target)
    if method != "numeric":
        raise InvalidParameterError(f"unknown method {method!r}", "method")
    sys_ = _system_for(params, system)
    cache = {}

    def evolve(s, dt):
        if dt == 0:
            return s
        n, h = _steps_for(dt, step_size)
        key = (n, h)
        if key not in cache:
            cache[key] = _propagator(sys_, h, n, order)
        q, v = s.as_vectors()
        out = cache[key] @ np.concatenate([q, v])
        dim = q.size
        return PhaseSpaceState.from_vectors(out[:dim], out[dim:], s.time + dt)

    return evolve


def _own_energy(state, system, idx):
    v = state.small_vel[idx]
    stretch = state.small_pos[idx] - state.big_pos
    return float(np.sum(0.5 * system.masses[1:][idx] * v**2 + 0.5 * system.springs[1:][idx] * stretch**2))


def default_kind(params):
    return "translation_free" if params.big_spring == 0 else "uniform"


def run_search(params, targets, initial="auto", amplitude=1.0, queries=1, *,
               method="exact", step_size=1e-3, variant="standard", interval=None,
               samples_per_interval=1, initial_state=None, tolerance=None,
               system=None, check_taps=True, order=4):
    """Tap, evolve one interval, repeat ``queries`` times.

    Samples are recorded at every tap instant (before the tap is applied)
    and at ``samples_per_interval - 1`` evenly spaced points in between.
    ``initial="auto"`` picks translation-free start for a free big
    oscillator and the uniform start otherwise.

    Returns
    -------
    trajectory : Trajectory
    report : GainReport
        Gains are target energy relative to the initial target energy,
        evaluated at tap instants; ``realized_gain`` is the value at the
        final instant.
    """
    if int(queries) != queries or queries < 0:
        raise InvalidParameterError(f"queries must be a non-negative integer, got {queries}", "q")
    queries = int(queries)
    if initial_state is None:
        kind = default_kind(params) if initial == "auto" else initial
        initial_state = osc.initial_conditions(kind, amplitude, params)
    if initial_state.n_items != params.n_items:
        raise InvalidParameterError("initial state size does not match params", "n")
    sched = TapSchedule(tap_interval(params) if interval is None else interval,
                        queries, tuple(np.atleast_1d(targets)), variant)
    idx = np.array(sched.targets)
    if idx.min() < 0 or idx.max() >= params.n_items:
        raise TargetIndexError(f"target {targets!r} out of range for N={params.n_items}")
    sys_ = _system_for(params, system)
    evolve = _make_evolver(params, method, step_size, system, order, int(idx[0]))
    sub = max(1, int(samples_per_interval))
    sub_dt = sched.interval / sub

    samples, tap_flags = [], []
    state = initial_state.replace(time=initial_state.time)
    samples.append(state)
    tap_flags.append(True)
    for _ in range(queries):
        state = apply_tap(state, idx, sched.variant, system=sys_,
                          tolerance=tolerance, check=check_taps)
        for j in range(sub):
            state = evolve(state, sub_dt)
            samples.append(state)
            tap_flags.append(j == sub - 1)

    energies = [osc.total_energy(s, params, sys_) for s in samples]
    reg = np.array([e.register for e in energies])
    target_ke = np.array([float(np.sum(0.5 * sys_.masses[1:][idx] * s.small_vel[idx] ** 2)) for s in samples])
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(reg > 0, target_ke / reg, np.nan)
    traj = Trajectory(
        times=np.array([s.time for s in samples]),
        states=samples,
        energies=energies,
        register_energy=reg,
        target_fraction=frac,
        tap_instant=np.array(tap_flags),
        targets=sched.targets,
        n_taps=queries,
        extras={"interval": sched.interval, "variant": sched.variant, "method": method,
                "small_masses": None if system is None else np.array(sys_.masses[1:])},
    )
    taps = traj.at_taps()
    e0 = _own_energy(samples[0], sys_, idx)
    own = np.array([_own_energy(samples[i], sys_, idx) for i in taps])
    gains = own / e0 if e0 > 0 else np.full(own.shape, np.nan)
    try:
        bound = osc.max_gain(samples[0], idx)
    except DegenerateStateError:
        bound = float("nan")
    report = GainReport(bound, float(gains[-1]), gains, float(traj.times[-1]), traj.times[taps])
    return traj, report


def run_reverse(params, target, queries=1, amplitude=1.0, *, initial_state=None, **kwargs):
    """Start with all register energy in ``target`` and run the same schedule.

    After the optimal number of taps the energy is spread evenly over the
    register.
    """
    if initial_state is None:
        n = params.n_items
        vel = np.zeros(n)
        t = int(np.atleast_1d(target)[0])
        if not 0 <= t < n:
            raise TargetIndexError(f"target {target!r} out of range for N={n}")
        vel[t] = amplitude
        initial_state = PhaseSpaceState(0.0, 0.0, np.zeros(n), vel)
    traj, _ = run_search(params, target, queries=queries, initial_state=initial_state, **kwargs)
    return traj


def velocity_amplitude_map(state: PhaseSpaceState, masses=None) -> AmplitudeVector:
    """Register velocities (mass-weighted if given) scaled to unit norm."""
    v = np.asarray(state.small_vel, dtype=float)
    if masses is not None:
        v = v * np.sqrt(masses)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise DegenerateStateError("register has no kinetic energy")
    return AmplitudeVector(v / norm)


def random_stop_gain(params, target, trials, seed=0, *, cycles=100, amplitude=1.0,
                     method="exact", return_details=False):
    """Average target fraction when the run is halted at a random tap instant.

    A single long run spanning ``cycles`` rotation periods provides the
    fraction at each tap instant; trial ``i`` draws its stopping instant
    with a generator seeded ``seed + i``.  Returns mean fraction divided by
    the largest fraction reached on the grid.
    """
    if int(trials) != trials or trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}", "trials")
    k = np.atleast_1d(target).size
    theta = target_angle(params.n_items, k)
    period = math.pi / (2 * theta)
    horizon = max(1, math.ceil(cycles * period))
    traj, _ = run_search(params, target, queries=horizon, amplitude=amplitude, method=method)
    fractions = traj.target_fraction[traj.at_taps()]
    stops = np.fromiter(
        (np.random.default_rng(seed + i).integers(horizon + 1) for i in range(int(trials))),
        dtype=np.int64, count=int(trials),
    )
    mean = float(fractions[stops].mean())
    peak = float(fractions.max())
    ratio = mean / peak
    if return_details:
        return ratio, {"mean_fraction": mean, "max_fraction": peak, "horizon": horizon,
                       "stops": stops, "fractions": fractions}
    return ratio
