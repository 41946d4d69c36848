"""Coupled-oscillator model: N identical unit oscillators tied to one big mass.

Units are fixed so that each small oscillator has mass 1 and spring 1.  The
big oscillator (mass M, spring K to ground) couples to the register only
through the centre-of-mass displacement, which splits the dynamics into a
2x2 block (big mass, register mean) plus relative coordinates that all
oscillate at unit frequency.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateStateError, InvalidParameterError, TargetIndexError

__all__ = [
    "OscillatorParams",
    "SpectralData",
    "PhaseSpaceState",
    "ModeState",
    "EnergyLedger",
    "GainReport",
    "LinearSystem",
    "family_params",
    "spectral",
    "to_modes",
    "from_modes",
    "initial_conditions",
    "max_gain",
    "total_energy",
    "build_system",
]


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class OscillatorParams:
    n_items: int
    big_mass: float
    big_spring: float = 0.0
    damping: float = 0.0
    small_mass: float = 1.0
    small_spring: float = 1.0

    def __post_init__(self):
        if int(self.n_items) != self.n_items or self.n_items < 2:
            raise InvalidParameterError(f"n_items must be an integer >= 2, got {self.n_items}", "n")
        if self.small_mass != 1.0 or self.small_spring != 1.0:
            raise InvalidParameterError("natural units require small_mass = small_spring = 1")
        if not self.big_mass > 0:
            raise InvalidParameterError(f"big_mass must be > 0, got {self.big_mass}", "big_mass")
        if not self.big_spring >= 0:
            raise InvalidParameterError(f"big_spring must be >= 0, got {self.big_spring}", "big_spring")
        if not self.damping >= 0:
            raise InvalidParameterError(f"damping must be >= 0, got {self.damping}", "gamma")
        object.__setattr__(self, "n_items", int(self.n_items))

    def with_damping(self, gamma: float) -> "OscillatorParams":
        return OscillatorParams(self.n_items, self.big_mass, self.big_spring, gamma)


@dataclass(frozen=True)
class SpectralData:
    """Normal-mode frequencies of the reduced system.

    ``coeff_plus`` and ``coeff_minus`` hold the (Y, ybar) coefficients of
    e = (1 - w^2) Y + sqrt(N/M) ybar.
    """

    omega_plus: float
    omega_minus: float
    omega_t: float
    coeff_plus: np.ndarray
    coeff_minus: np.ndarray

    @property
    def omega_sq(self):
        return self.omega_plus**2, self.omega_minus**2


@dataclass(frozen=True)
class PhaseSpaceState:
    big_pos: float
    big_vel: float
    small_pos: np.ndarray
    small_vel: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        x = _readonly(self.small_pos)
        v = _readonly(self.small_vel)
        if x.ndim != 1 or x.shape != v.shape:
            raise InvalidParameterError("small_pos and small_vel must be 1-d arrays of equal length")
        values = np.concatenate([x, v, [self.big_pos, self.big_vel, self.time]])
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("phase-space state contains non-finite values")
        object.__setattr__(self, "small_pos", x)
        object.__setattr__(self, "small_vel", v)
        object.__setattr__(self, "big_pos", float(self.big_pos))
        object.__setattr__(self, "big_vel", float(self.big_vel))
        object.__setattr__(self, "time", float(self.time))

    @property
    def n_items(self) -> int:
        return self.small_pos.size

    def replace(self, **changes) -> "PhaseSpaceState":
        fields = dict(
            big_pos=self.big_pos,
            big_vel=self.big_vel,
            small_pos=self.small_pos,
            small_vel=self.small_vel,
            time=self.time,
        )
        fields.update(changes)
        return PhaseSpaceState(**fields)

    def as_vectors(self):
        """Stack (X, x_1..x_N) and their velocities into two arrays."""
        q = np.concatenate([[self.big_pos], self.small_pos])
        v = np.concatenate([[self.big_vel], self.small_vel])
        return q, v

    @classmethod
    def from_vectors(cls, q, v, time=0.0) -> "PhaseSpaceState":
        return cls(q[0], v[0], q[1:], v[1:], time)


@dataclass(frozen=True)
class ModeState:
    """Reduced coordinates Y = sqrt(M) X, ybar = sqrt(N) xbar, y_t = x_t - xbar.

    ``residuals`` holds x_i - xbar for every i != target, in index order, so
    the decoupled modes travel with the state instead of being projected out.
    """

    Y: float
    Y_dot: float
    ybar: float
    ybar_dot: float
    y_t: float
    y_t_dot: float
    residuals: np.ndarray
    residual_vels: np.ndarray
    target: int
    big_mass: float
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "residuals", _readonly(self.residuals))
        object.__setattr__(self, "residual_vels", _readonly(self.residual_vels))

    @property
    def n_items(self) -> int:
        return self.residuals.size + 1


@dataclass(frozen=True)
class EnergyLedger:
    big: float
    register_kinetic: float
    register_potential: float

    @property
    def register(self) -> float:
        return self.register_kinetic + self.register_potential

    @property
    def total(self) -> float:
        return self.big + self.register_kinetic + self.register_potential


@dataclass(frozen=True)
class GainReport:
    max_gain: float
    realized_gain: float
    gain_vs_time: np.ndarray
    stop_time: float
    times: np.ndarray = field(default_factory=lambda: np.empty(0))


@dataclass(frozen=True)
class LinearSystem:
    """Mass and spring constants of the full (N+1)-body system.

    Index 0 is the big oscillator; springs[0] ties it to the ground and
    springs[i] ties small oscillator i to the big one.  Every body feels a
    drag force -damping * mass * velocity.
    """

    masses: np.ndarray
    springs: np.ndarray
    damping: float = 0.0

    def __post_init__(self):
        m = _readonly(self.masses)
        k = _readonly(self.springs)
        if m.shape != k.shape or m.ndim != 1 or m.size < 2:
            raise InvalidParameterError("masses and springs must be 1-d arrays of equal length >= 2")
        if np.any(m <= 0) or np.any(k < 0) or self.damping < 0:
            raise InvalidParameterError("masses must be > 0, springs and damping >= 0")
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "springs", k)

    @property
    def n_items(self) -> int:
        return self.masses.size - 1

    def acceleration(self, q):
        """Spring acceleration for q of shape (N+1,) or (N+1, batch)."""
        k, m = self.springs, self.masses
        stretch = q[1:] - q[:1]
        force = np.empty_like(q)
        force[1:] = -k[1:].reshape((-1,) + (1,) * (q.ndim - 1)) * stretch
        force[0] = -k[0] * q[0] - force[1:].sum(axis=0)
        return force / m.reshape((-1,) + (1,) * (q.ndim - 1))


def build_system(params: OscillatorParams, small_masses=None, small_springs=None, scale: float = 1.0):
    """Expand ``params`` into per-body constants, optionally detuned or rescaled."""
    n = params.n_items
    m = np.ones(n) if small_masses is None else np.asarray(small_masses, dtype=float)
    k = np.ones(n) if small_springs is None else np.asarray(small_springs, dtype=float)
    if m.shape != (n,) or k.shape != (n,):
        raise InvalidParameterError(f"per-oscillator arrays must have length {n}")
    if not scale > 0:
        raise InvalidParameterError(f"scale must be > 0, got {scale}", "alpha")
    masses = scale * np.concatenate([[params.big_mass], m])
    springs = scale * np.concatenate([[params.big_spring], k])
    return LinearSystem(masses, springs, params.damping)


def family_params(family: str, p: int, n_items: int, damping: float = 0.0) -> OscillatorParams:
    """Tuned (M, K) making every normal frequency rational.

    Family ``"A"`` gives w+ = (2p+1)/2, w- = 1/2 (period 4 pi); family ``"B"``
    gives w+ = 2p, w- = 0 with a free big oscillator (period 2 pi).
    """
    if int(p) != p or p < 1:
        raise InvalidParameterError(f"p must be a positive integer, got {p}", "p")
    if int(n_items) != n_items or n_items < 2:
        raise InvalidParameterError(f"n_items must be an integer >= 2, got {n_items}", "n")
    fam = str(family).upper()
    n = float(n_items)
    if fam == "A":
        denom = 3.0 * (2 * p + 3) * (2 * p - 1)
        return OscillatorParams(int(n_items), 16.0 * n / denom, (2 * p + 1) ** 2 * n / denom, damping)
    if fam == "B":
        return OscillatorParams(int(n_items), n / ((2 * p + 1) * (2 * p - 1)), 0.0, damping)
    raise InvalidParameterError(f"family must be 'A' or 'B', got {family!r}", "family")


def spectral(params: OscillatorParams) -> SpectralData:
    n, M, K = params.n_items, params.big_mass, params.big_spring
    s = 1.0 + (K + n) / M
    prod = K / M
    w2_plus = 0.5 * s + math.sqrt(0.25 * s * s - prod)
    # product form avoids cancellation when K << M
    w2_minus = prod / w2_plus
    c = math.sqrt(n / M)
    return SpectralData(
        omega_plus=math.sqrt(w2_plus),
        omega_minus=math.sqrt(w2_minus),
        omega_t=1.0,
        coeff_plus=_readonly([1.0 - w2_plus, c]),
        coeff_minus=_readonly([1.0 - w2_minus, c]),
    )


def _check_target(target, n_items):
    if int(target) != target or not 0 <= target < n_items:
        raise TargetIndexError(f"target {target!r} out of range for N={n_items}")
    return int(target)


def to_modes(state: PhaseSpaceState, target: int, params: OscillatorParams) -> ModeState:
    n = state.n_items
    t = _check_target(target, n)
    sqM, sqN = math.sqrt(params.big_mass), math.sqrt(n)
    xbar, vbar = state.small_pos.mean(), state.small_vel.mean()
    rel_x = state.small_pos - xbar
    rel_v = state.small_vel - vbar
    others = np.arange(n) != t
    return ModeState(
        Y=sqM * state.big_pos,
        Y_dot=sqM * state.big_vel,
        ybar=sqN * xbar,
        ybar_dot=sqN * vbar,
        y_t=rel_x[t],
        y_t_dot=rel_v[t],
        residuals=rel_x[others],
        residual_vels=rel_v[others],
        target=t,
        big_mass=params.big_mass,
        time=state.time,
    )


def from_modes(modes: ModeState) -> PhaseSpaceState:
    n, t = modes.n_items, modes.target
    sqM, sqN = math.sqrt(modes.big_mass), math.sqrt(n)
    xbar, vbar = modes.ybar / sqN, modes.ybar_dot / sqN
    rel_x = np.insert(modes.residuals, t, modes.y_t)
    rel_v = np.insert(modes.residual_vels, t, modes.y_t_dot)
    return PhaseSpaceState(modes.Y / sqM, modes.Y_dot / sqM, rel_x + xbar, rel_v + vbar, modes.time)


def initial_conditions(kind: str, amplitude: float, params: OscillatorParams) -> PhaseSpaceState:
    """All small oscillators at rest position moving with velocity ``amplitude``.

    ``"uniform"`` leaves the big oscillator at rest.  ``"translation_free"``
    gives it velocity -(N/M) A so that total momentum vanishes; that only
    removes a normal mode when the big oscillator has no spring (K = 0).
    """
    n = params.n_items
    if kind == "uniform":
        big_vel = 0.0
    elif kind == "translation_free":
        if params.big_spring != 0:
            raise InvalidParameterError(
                "translation_free initial conditions require big_spring K = 0", "initial"
            )
        big_vel = -n / params.big_mass * amplitude
    else:
        raise InvalidParameterError(f"unknown initial kind {kind!r}", "initial")
    return PhaseSpaceState(0.0, big_vel, np.zeros(n), np.full(n, float(amplitude)))


def max_gain(state: PhaseSpaceState, target) -> float:
    """Largest factor by which the target's kinetic energy can grow.

    Only the part of the register velocity lying in span{uniform, target}
    takes part in the search; its energy divided by the target's present
    kinetic energy bounds the gain.  For a single target this is
    [N vbar^2 + N/(N-1) (v_t - vbar)^2] / v_t^2.
    """
    v = state.small_vel
    n = v.size
    idx = np.unique(np.atleast_1d(target))
    if np.any(idx < 0) or np.any(idx >= n):
        raise TargetIndexError(f"target {target!r} out of range for N={n}")
    denom = float(np.sum(v[idx] ** 2))
    if denom == 0.0:
        raise DegenerateStateError("target velocity is zero; gain ratio undefined")
    if idx.size == 1:
        vbar = v.mean()
        focusable = n * vbar**2 + n / (n - 1) * (v[idx[0]] - vbar) ** 2
        return float(focusable / denom)
    k = idx.size
    mask = np.zeros(n, dtype=bool)
    mask[idx] = True
    in_t = v[mask]
    mean_rest = v[~mask].mean() if k < n else 0.0
    # zero-sum motion inside the target set is only ever sign-flipped
    focusable = k * in_t.mean() ** 2 + (n - k) * mean_rest**2 + np.sum((in_t - in_t.mean()) ** 2)
    return float(focusable / denom)


def total_energy(state: PhaseSpaceState, params, system: LinearSystem | None = None) -> EnergyLedger:
    """Energy split into big oscillator, register kinetic and spring terms.

    The coupling springs (x_i - X) are booked on the register side.
    """
    if system is None:
        system = build_system(params)
    m, k = system.masses, system.springs
    stretch = state.small_pos - state.big_pos
    big = 0.5 * m[0] * state.big_vel**2 + 0.5 * k[0] * state.big_pos**2
    kin = 0.5 * float(np.sum(m[1:] * state.small_vel**2))
    pot = 0.5 * float(np.sum(k[1:] * stretch**2))
    return EnergyLedger(float(big), kin, pot)
