"""Abstract amplitude-amplification search on a real N-dimensional register.

States are real unit vectors.  The two reflections act in O(N) and every
function returns a fresh :class:`AmplitudeVector`; inputs are never mutated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, TargetIndexError

__all__ = [
    "AmplitudeVector",
    "QueryPlan",
    "uniform_state",
    "basis_state",
    "reflect_target",
    "reflect_mean",
    "grover_iterate",
    "target_angle",
    "closed_form_overlap",
    "optimal_queries",
    "classical_baseline",
    "simulate_classical_search",
]


@dataclass(frozen=True)
class AmplitudeVector:
    """Real amplitudes of a search state, stored as a read-only array."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=float)
        if a.ndim != 1 or a.size < 1:
            raise InvalidParameterError("amplitudes must be a non-empty 1-d array")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def n_items(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.amplitudes, self.amplitudes)))

    def probability(self, index) -> float:
        """Squared amplitude summed over one index or a collection of indices."""
        idx = _check_targets(index, self.n_items)
        return float(np.sum(self.amplitudes[idx] ** 2))

    def __len__(self):
        return self.n_items


@dataclass(frozen=True)
class QueryPlan:
    n_items: int
    theta: float
    q_optimal: int
    predicted_overlap: float
    exact: bool
    q_real: float


def _check_size(n_items):
    if int(n_items) != n_items or n_items < 1:
        raise InvalidParameterError(f"n_items must be a positive integer, got {n_items}", "n")
    return int(n_items)


def _check_targets(targets, n_items):
    idx = np.atleast_1d(np.asarray(targets))
    if idx.size == 0:
        raise TargetIndexError("at least one target index is required")
    if not np.issubdtype(idx.dtype, np.integer):
        raise TargetIndexError(f"target indices must be integers, got {targets!r}")
    if np.any(idx < 0) or np.any(idx >= n_items):
        raise TargetIndexError(f"target {targets!r} out of range for N={n_items}")
    return np.unique(idx)


def uniform_state(n_items: int) -> AmplitudeVector:
    """Equal superposition with every amplitude 1/sqrt(N)."""
    n = _check_size(n_items)
    return AmplitudeVector(np.full(n, 1.0 / math.sqrt(n)))


def basis_state(n_items: int, index: int) -> AmplitudeVector:
    n = _check_size(n_items)
    idx = _check_targets(index, n)
    a = np.zeros(n)
    a[idx] = 1.0
    return AmplitudeVector(a)


def reflect_target(state: AmplitudeVector, target) -> AmplitudeVector:
    """Oracle reflection: negate the amplitude(s) at ``target``."""
    idx = _check_targets(target, state.n_items)
    a = state.amplitudes.copy()
    a[idx] = -a[idx]
    return AmplitudeVector(a)


def reflect_mean(state: AmplitudeVector) -> AmplitudeVector:
    """Inversion about the mean, a_i -> 2*mean(a) - a_i."""
    a = state.amplitudes
    return AmplitudeVector(2.0 * a.mean() - a)


def target_angle(n_items: int, n_targets: int = 1) -> float:
    """Rotation half-angle arcsin(sqrt(k/N)) of the search plane."""
    n = _check_size(n_items)
    if not 1 <= n_targets <= n:
        raise InvalidParameterError(f"n_targets must lie in [1, {n}]", "target")
    return math.asin(math.sqrt(n_targets / n))


def closed_form_overlap(n_items: int, q, n_targets: int = 1):
    """sin^2((2q+1) theta) for scalar or array ``q``."""
    theta = target_angle(n_items, n_targets)
    return np.sin((2 * np.asarray(q, dtype=float) + 1) * theta) ** 2


def grover_iterate(n_items: int, target, q: int):
    """Apply the search iteration ``q`` times to the uniform state.

    Returns
    -------
    state : AmplitudeVector
        ``(reflect_mean . reflect_target)^q`` applied to the uniform state.
    trace : ndarray, shape (q + 1,)
        Target probability measured after each of 0..q iterations.
    """
    if int(q) != q or q < 0:
        raise InvalidParameterError(f"q must be a non-negative integer, got {q}", "q")
    state = uniform_state(n_items)
    _check_targets(target, state.n_items)
    trace = np.empty(int(q) + 1)
    trace[0] = state.probability(target)
    for i in range(1, int(q) + 1):
        state = reflect_mean(reflect_target(state, target))
        trace[i] = state.probability(target)
    return state, trace


def optimal_queries(n_items: int, n_targets: int = 1) -> QueryPlan:
    """Integer query count maximizing the final target probability.

    The real root Q* of (2Q+1) theta = pi/2 is rounded to whichever of its
    floor and ceiling gives the larger overlap; ties go to fewer queries.
    """
    n = _check_size(n_items)
    theta = target_angle(n, n_targets)
    q_real = (math.pi / (2.0 * theta) - 1.0) / 2.0
    lo = max(0, math.floor(q_real))
    hi = max(0, math.ceil(q_real))
    p_lo = math.sin((2 * lo + 1) * theta) ** 2
    p_hi = math.sin((2 * hi + 1) * theta) ** 2
    q, p = (hi, p_hi) if p_hi > p_lo + 1e-12 else (lo, p_lo)
    exact = abs((2 * q + 1) * theta - math.pi / 2) <= 1e-12
    return QueryPlan(n, theta, q, p, exact, q_real)


def classical_baseline(n_items: int, with_memory: bool = False) -> float:
    """Expected number of binary queries for unstructured classical search."""
    n = _check_size(n_items)
    return (n + 1) / 2.0 if with_memory else float(n)


def simulate_classical_search(n_items: int, with_memory: bool, trials: int, seed: int = 0):
    """Monte-Carlo count of random probes needed to hit a hidden item.

    Without memory every probe is an independent uniform draw; with memory
    the probes follow a random permutation so no item is inspected twice.
    Returns the per-trial query counts.
    """
    n = _check_size(n_items)
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1", "trials")
    rng = np.random.default_rng(seed)
    target = rng.integers(n, size=trials)
    counts = np.zeros(trials, dtype=np.int64)
    if with_memory:
        chunk = max(1, 2_000_000 // n)
        for start in range(0, trials, chunk):
            stop = min(trials, start + chunk)
            order = rng.random((stop - start, n)).argsort(axis=1)
            hit = order == target[start:stop, None]
            counts[start:stop] = hit.argmax(axis=1) + 1
        return counts
    active = np.arange(trials)
    while active.size:
        counts[active] += 1
        probe = rng.integers(n, size=active.size)
        active = active[probe != target[active]]
    return counts
