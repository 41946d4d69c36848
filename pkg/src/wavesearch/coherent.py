"""Coherent states of a single oscillator and the tapped half-oscillator.

A coherent state is carried as its complex label ``alpha`` plus an explicit
global phase, so the -1 picked up on reflection stays observable.  The
tapped oscillator (hard wall at x = 0) is built by the method of images as
C (|alpha> - |-alpha>), normalized on the physical half-line x <= 0.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateStateError, InvalidParameterError

__all__ = [
    "CoherentState",
    "TappedCoherentState",
    "Expectations",
    "evolve_coherent",
    "expectations",
    "wavepacket_at",
    "tap_coherent",
    "tapped_state",
    "tapped_wavefunction_at",
    "number_coefficients",
    "classical_trajectory",
    "quadrature_grid",
]


@dataclass(frozen=True)
class CoherentState:
    alpha: complex
    omega: float = 1.0
    mass: float = 1.0
    hbar: float = 1.0
    global_phase: float = 0.0

    def __post_init__(self):
        for name in ("omega", "mass", "hbar"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be > 0", name)
        object.__setattr__(self, "alpha", complex(self.alpha))

    @property
    def delta_x(self) -> float:
        return math.sqrt(self.hbar / (2 * self.mass * self.omega))

    @property
    def delta_p(self) -> float:
        return math.sqrt(self.mass * self.hbar * self.omega / 2)

    @property
    def energy(self) -> float:
        return self.hbar * self.omega * (abs(self.alpha) ** 2 + 0.5)


@dataclass(frozen=True)
class TappedCoherentState:
    """Image superposition C (|alpha> - |-alpha>) of a wall-bounded oscillator."""

    base: CoherentState

    @property
    def alpha(self) -> complex:
        return self.base.alpha

    @property
    def normalization(self) -> float:
        return _image_norm(self.base.alpha)

    def evolve(self, dt: float) -> "TappedCoherentState":
        return TappedCoherentState(evolve_coherent(self.base, dt))


@dataclass(frozen=True)
class Expectations:
    x: float
    p: float
    delta_x: float
    delta_p: float
    energy: float


def _image_norm(alpha):
    return (1.0 - math.exp(-2.0 * abs(alpha) ** 2)) ** -0.5


def evolve_coherent(state: CoherentState, dt: float) -> CoherentState:
    """Free evolution: alpha -> alpha exp(-i w dt), phase -> phase - w dt / 2."""
    if dt < 0:
        raise InvalidParameterError(f"dt must be >= 0, got {dt}", "dt")
    if dt == 0:
        return state
    w = state.omega
    return replace(
        state,
        alpha=state.alpha * cmath.exp(-1j * w * dt),
        global_phase=state.global_phase - 0.5 * w * dt,
    )


def expectations(state: CoherentState) -> Expectations:
    dx, dp = state.delta_x, state.delta_p
    return Expectations(
        x=2 * dx * state.alpha.real,
        p=2 * dp * state.alpha.imag,
        delta_x=dx,
        delta_p=dp,
        energy=state.energy,
    )


def wavepacket_at(state: CoherentState, x):
    """Minimum-uncertainty Gaussian centred on <x> with momentum <p>.

    Vectorized over ``x``.  The global phase is included.  The constant
    factor exp(-i <x><p> / 2 hbar) of the Fock-basis coherent state is not:
    it is the same for alpha and -alpha, so image superpositions only differ
    from the Fock expansion by an overall phase.
    """
    x = np.asarray(x, dtype=float)
    e = expectations(state)
    pref = (state.mass * state.omega / (math.pi * state.hbar)) ** 0.25
    arg = -(((x - e.x) / (2 * e.delta_x)) ** 2) + 1j * (x * e.p / state.hbar + state.global_phase)
    return pref * np.exp(arg)


def tap_coherent(state: CoherentState) -> CoherentState:
    """Elastic reflection: alpha -> -alpha with the reflection sign in the phase."""
    return replace(state, alpha=-state.alpha, global_phase=state.global_phase + math.pi)


def tapped_state(alpha, omega=1.0, mass=1.0, hbar=1.0, global_phase=0.0) -> TappedCoherentState:
    """Half-oscillator coherent state built from ``alpha`` and its image."""
    if alpha == 0:
        raise DegenerateStateError("alpha = 0: the odd image superposition vanishes")
    return TappedCoherentState(CoherentState(alpha, omega, mass, hbar, global_phase))


def tapped_wavefunction_at(tapped: TappedCoherentState, x):
    """C (psi_alpha(x) - psi_{-alpha}(x)); zero at the wall by construction."""
    base = tapped.base
    image = replace(base, alpha=-base.alpha)
    return tapped.normalization * (wavepacket_at(base, x) - wavepacket_at(image, x))


def number_coefficients(state, n_max=None, cutoff=1e-16):
    """Fock-basis amplitudes <n|state>, truncated once |alpha|^n/sqrt(n!) < cutoff.

    Works for both plain and tapped coherent states; the global phase is
    applied.  Tapped coefficients are expressed in the full-line basis and
    vanish for even n.
    """
    tapped = isinstance(state, TappedCoherentState)
    base = state.base if tapped else state
    a = base.alpha
    r = abs(a)
    if n_max is None:
        n_max = 0
        if r > 0:
            # grow n until log(r^n / sqrt(n!)) drops below log(cutoff), past the peak
            while n_max < r * r or n_max * math.log(r) - 0.5 * gammaln(n_max + 1) > math.log(cutoff):
                n_max += 1
    n = np.arange(n_max + 1)
    with np.errstate(divide="ignore"):
        log_mag = np.where(n == 0, 0.0, n * np.log(r if r > 0 else 1.0)) - 0.5 * gammaln(n + 1)
    mag = np.exp(log_mag - 0.5 * r * r)
    if r == 0:
        mag = np.where(n == 0, 1.0, 0.0)
    coeffs = mag * np.exp(1j * n * cmath.phase(a)) * cmath.exp(1j * base.global_phase)
    if tapped:
        coeffs = state.normalization * coeffs * (1 - (-1.0) ** n)
    return coeffs


def classical_trajectory(x0, p0, t, mass=1.0, omega=1.0):
    """Position of a classical oscillator: x0 cos(wt) + p0/(m w) sin(wt)."""
    t = np.asarray(t, dtype=float)
    return x0 * np.cos(omega * t) + p0 / (mass * omega) * np.sin(omega * t)


def quadrature_grid(centers, delta_x, half_width=10.0, points=10_000):
    """Uniform grid covering +-``half_width`` spreads around every centre."""
    centers = np.atleast_1d(centers)
    lo = centers.min() - half_width * delta_x
    hi = centers.max() + half_width * delta_x
    return np.linspace(lo, hi, points)
