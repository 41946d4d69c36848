import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from wavesearch import engine as en
from wavesearch import oscillators as osc
from wavesearch import search
from wavesearch.errors import (
    InvalidParameterError,
    MistimedTapError,
    TargetIndexError,
    UnsupportedModeError,
)


def expm_oracle(state, params, dt, masses=None, springs=None):
    """Evolve with the matrix exponential of the first-order system."""
    n = params.n_items
    m = np.r_[params.big_mass, np.ones(n)] if masses is None else np.asarray(masses, float)
    k = np.r_[params.big_spring, np.ones(n)] if springs is None else np.asarray(springs, float)
    stiff = np.zeros((n + 1, n + 1))
    stiff[0, 0] = k[0] + k[1:].sum()
    stiff[0, 1:] = stiff[1:, 0] = -k[1:]
    stiff[1:, 1:] = np.diag(k[1:])
    a = np.zeros((2 * n + 2, 2 * n + 2))
    a[: n + 1, n + 1:] = np.eye(n + 1)
    a[n + 1:, : n + 1] = -stiff / m[:, None]
    a[n + 1:, n + 1:] = -params.damping * np.eye(n + 1)
    q, v = state.as_vectors()
    y = expm(a * dt) @ np.r_[q, v]
    return y[: n + 1], y[n + 1:]


def random_state(rng, n):
    return osc.PhaseSpaceState(rng.normal(), rng.normal(), rng.normal(size=n), rng.normal(size=n))


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(2, 12),
    M=st.floats(0.2, 20),
    K=st.floats(0, 20),
    dt=st.floats(0.01, 15),
    seed=st.integers(0, 2**31),
)
def test_exact_matches_matrix_exponential(n, M, K, dt, seed):
    params = osc.OscillatorParams(n, M, K)
    state = random_state(np.random.default_rng(seed), n)
    out = en.evolve_exact(state, params, dt, target=seed % n)
    q, v = expm_oracle(state, params, dt)
    oq, ov = out.as_vectors()
    scale = 1 + np.abs(np.r_[q, v]).max()
    np.testing.assert_allclose(oq, q, atol=1e-9 * scale)
    np.testing.assert_allclose(ov, v, atol=1e-9 * scale)
    assert out.time == pytest.approx(dt)


@pytest.mark.parametrize("gamma", [0.0, 1e-3, 0.05])
def test_numeric_matches_matrix_exponential(gamma):
    rng = np.random.default_rng(1)
    params = osc.family_params("A", 1, 5, damping=gamma)
    state = random_state(rng, 5)
    out = en.evolve_numeric(state, params, 3.7, step_size=1e-3)
    q, v = expm_oracle(state, params, 3.7)
    oq, ov = out.as_vectors()
    np.testing.assert_allclose(oq, q, atol=1e-9)
    np.testing.assert_allclose(ov, v, atol=1e-9)


def test_numeric_custom_constants_match_oracle():
    rng = np.random.default_rng(2)
    params = osc.family_params("B", 1, 4)
    masses = np.r_[params.big_mass, rng.uniform(0.8, 1.2, 4)]
    springs = np.r_[0.0, rng.uniform(0.8, 1.2, 4)]
    system = osc.LinearSystem(masses, springs, 0.0)
    state = random_state(rng, 4)
    out = en.evolve_numeric(state, params, 2.5, system=system)
    q, v = expm_oracle(state, params, 2.5, masses, springs)
    np.testing.assert_allclose(np.r_[out.as_vectors()], np.r_[q, v], atol=1e-9)


def test_exact_refuses_damping():
    params = osc.family_params("B", 1, 4, damping=0.1)
    state = osc.initial_conditions("uniform", 1.0, params)
    with pytest.raises(UnsupportedModeError):
        en.evolve_exact(state, params, 1.0)


def test_negative_dt_rejected():
    params = osc.family_params("B", 1, 4)
    state = osc.initial_conditions("uniform", 1.0, params)
    with pytest.raises(InvalidParameterError):
        en.evolve_exact(state, params, -1.0)
    with pytest.raises(InvalidParameterError):
        en.evolve_numeric(state, params, -1.0)
    assert en.evolve_exact(state, params, 0.0) is state


def test_family_a_returns_after_full_period():
    rng = np.random.default_rng(3)
    params = osc.family_params("A", 2, 6)
    state = random_state(rng, 6)
    out = en.evolve_exact(state, params, 4 * math.pi)
    np.testing.assert_allclose(np.r_[out.as_vectors()], np.r_[state.as_vectors()], atol=1e-10)


@pytest.mark.parametrize("family, interval", [("A", 2 * math.pi), ("B", math.pi)])
def test_tap_interval(family, interval):
    assert en.tap_interval(osc.family_params(family, 3, 8)) == pytest.approx(interval)


def test_tap_interval_untuned():
    with pytest.raises(InvalidParameterError):
        en.tap_interval(osc.OscillatorParams(4, 1.0, 0.3))


@pytest.mark.parametrize("family", ["A", "B"])
def test_half_period_reflects_about_mean(family):
    # from a zero-displacement instant, one interval maps register velocities
    # to +-(reflection about their mean) and restores zero displacement
    rng = np.random.default_rng(4)
    n = 7
    params = osc.family_params(family, 1, n)
    vel = rng.normal(size=n)
    if family == "B":
        big = -vel.sum() / params.big_mass
    else:
        big = 0.0
        vel = vel - vel.mean() + 0.4
    state = osc.PhaseSpaceState(0.0, big, np.zeros(n), vel)
    out = en.evolve_exact(state, params, en.tap_interval(params))
    reflected = 2 * vel.mean() - vel
    if family == "A":
        np.testing.assert_allclose(np.abs(out.small_vel), np.abs(reflected), atol=1e-10)
        np.testing.assert_allclose(out.small_vel, -reflected, atol=1e-10)
        np.testing.assert_allclose(out.small_pos, 0.0, atol=1e-10)
    else:
        np.testing.assert_allclose(out.small_vel, reflected, atol=1e-10)
        com = (params.big_mass * out.big_pos + out.small_pos.sum()) / (params.big_mass + n)
        np.testing.assert_allclose(out.small_pos - com, 0.0, atol=1e-10)


def test_tap_examples():
    params = osc.family_params("B", 1, 4)
    state = osc.initial_conditions("uniform", 1.0, params)
    tapped = en.apply_tap(state, 2, params=params)
    np.testing.assert_array_equal(tapped.small_vel, [1, 1, -1, 1])
    comp = en.apply_tap(state, 2, "complement", params=params)
    np.testing.assert_array_equal(comp.small_vel, [-1, -1, 1, -1])
    twice = en.apply_tap(tapped, 2, params=params)
    np.testing.assert_array_equal(twice.small_vel, state.small_vel)
    e0 = osc.total_energy(state, params).total
    assert osc.total_energy(tapped, params).total == pytest.approx(e0, abs=1e-14)
    multi = en.apply_tap(state, [0, 3], params=params)
    np.testing.assert_array_equal(multi.small_vel, [-1, 1, 1, -1])


def test_tap_errors():
    params = osc.family_params("B", 1, 4)
    state = osc.initial_conditions("uniform", 1.0, params)
    with pytest.raises(TargetIndexError):
        en.apply_tap(state, 4, params=params)
    with pytest.raises(InvalidParameterError):
        en.apply_tap(state, 0, "sideways", params=params)
    moved = en.evolve_exact(state, osc.family_params("A", 1, 4), 1.0)
    with pytest.raises(MistimedTapError) as info:
        en.apply_tap(moved, 0, params=osc.family_params("A", 1, 4))
    assert info.value.displacement > info.value.tolerance
    en.apply_tap(moved, 0, check=False)


@pytest.mark.parametrize("family", ["A", "B"])
@pytest.mark.parametrize("n", [2, 4, 16, 25])
def test_run_search_follows_grover(family, n):
    params = osc.family_params(family, 1, n)
    q = search.optimal_queries(n).q_optimal + 2
    traj, report = en.run_search(params, n - 1, queries=q)
    fr = traj.target_fraction[traj.at_taps()]
    np.testing.assert_allclose(fr, search.closed_form_overlap(n, np.arange(q + 1)), atol=1e-9)
    # velocities line up with the abstract amplitudes up to a global sign
    amp = en.velocity_amplitude_map(traj.final)
    target_state, _ = search.grover_iterate(n, n - 1, q)
    sign = np.sign(amp.amplitudes @ target_state.amplitudes)
    np.testing.assert_allclose(sign * amp.amplitudes, target_state.amplitudes, atol=1e-9)
    assert report.max_gain == pytest.approx(n, rel=1e-12)


def test_run_search_example_n4():
    traj, report = en.run_search(osc.family_params("B", 1, 4), 2, queries=1)
    assert traj.target_fraction[-1] == pytest.approx(1.0, abs=1e-12)
    assert report.realized_gain == pytest.approx(4.0, abs=1e-9)
    assert traj.n_taps == 1
    np.testing.assert_allclose(traj.times, [0, math.pi])


def test_run_search_energy_conserved():
    params = osc.family_params("A", 1, 9)
    traj, _ = en.run_search(params, 0, queries=4, samples_per_interval=9)
    totals = np.array([e.total for e in traj.energies])
    np.testing.assert_allclose(totals, totals[0], rtol=1e-12)


def test_numeric_matches_exact_run():
    params = osc.family_params("B", 1, 16)
    exact, _ = en.run_search(params, 3, queries=3)
    numeric, _ = en.run_search(params, 3, queries=3, method="numeric", step_size=1e-3)
    assert numeric.target_fraction[-1] == pytest.approx(0.9613189697265625, abs=1e-6)
    np.testing.assert_allclose(numeric.final.small_vel, exact.final.small_vel, atol=1e-6)


def test_multi_target_same_constants():
    params = osc.family_params("B", 1, 16)
    traj, _ = en.run_search(params, [1, 5, 9, 13], queries=1)
    assert traj.target_fraction[-1] == pytest.approx(1.0, abs=1e-10)
    params = osc.family_params("A", 1, 40)
    k = 3
    plan = search.optimal_queries(40, k)
    traj, _ = en.run_search(params, [0, 7, 30], queries=plan.q_optimal)
    assert traj.target_fraction[-1] == pytest.approx(plan.predicted_overlap, abs=1e-9)


def test_family_a_synchronized_beyond_one_period():
    params = osc.family_params("A", 1, 100)
    traj, _ = en.run_search(params, 42, queries=30)
    fr = traj.target_fraction[traj.at_taps()]
    np.testing.assert_allclose(fr, search.closed_form_overlap(100, np.arange(31)), atol=1e-9)


def test_reverse_spreads_energy():
    for family in ("A", "B"):
        params = osc.family_params(family, 1, 4)
        traj = en.run_reverse(params, 0, 1)
        np.testing.assert_allclose(traj.kinetic_fractions(-1), 0.25, atol=1e-12)
    # forward then reverse brings the uniform state back
    params = osc.family_params("B", 1, 4)
    fwd, _ = en.run_search(params, 1, queries=1)
    back = en.run_reverse(params, 1, 1, initial_state=fwd.final)
    np.testing.assert_allclose(np.abs(back.final.small_vel), 1.0, atol=1e-10)


def test_random_stop_gain():
    params = osc.family_params("B", 1, 4)
    ratio = en.random_stop_gain(params, 0, 4000, seed=0, cycles=50)
    assert ratio == pytest.approx(0.5, abs=0.01)
    assert en.random_stop_gain(params, [0, 1, 2, 3], 20, cycles=3) == pytest.approx(1.0)
    a = en.random_stop_gain(params, 0, 50, seed=9, cycles=5)
    b = en.random_stop_gain(params, 0, 50, seed=9, cycles=5)
    assert a == b


def test_residual_modes_are_decoupled():
    # target relative and residual coordinates oscillate at unit frequency,
    # untouched by the big mass
    rng = np.random.default_rng(6)
    params = osc.family_params("A", 1, 8)
    state = random_state(rng, 8)
    m0 = osc.to_modes(state, 3, params)
    for t in (0.3, 1.7, 5.0):
        mt = osc.to_modes(en.evolve_exact(state, params, t, target=3), 3, params)
        np.testing.assert_allclose(
            mt.residuals, m0.residuals * math.cos(t) + m0.residual_vels * math.sin(t), atol=1e-10
        )
        assert mt.y_t == pytest.approx(m0.y_t * math.cos(t) + m0.y_t_dot * math.sin(t), abs=1e-10)


def test_velocity_amplitude_map():
    state = osc.PhaseSpaceState(0, 0, np.zeros(3), [3.0, 0.0, 4.0])
    np.testing.assert_allclose(en.velocity_amplitude_map(state).amplitudes, [0.6, 0, 0.8])
    weighted = en.velocity_amplitude_map(state, masses=[4.0, 1.0, 1.0])
    np.testing.assert_allclose(weighted.amplitudes, np.array([6.0, 0, 4.0]) / math.sqrt(52))


def test_damped_relative_mode_envelope():
    gamma = 1e-3
    params = osc.family_params("A", 1, 4, damping=gamma)
    state = osc.PhaseSpaceState(0.0, 0.0, np.zeros(4), [1.0, -1.0, 0.0, 0.0])
    times, q, v = en.integrate_numeric(state, params, 40.0, step_size=1e-3, stride=100)
    rel = q[:, 1] - q[:, 2]
    w = math.sqrt(1 - gamma**2 / 4)
    expected = 2 * np.exp(-gamma * times / 2) * np.sin(w * times) / w
    np.testing.assert_allclose(rel, expected, atol=1e-9)
    assert 1 - w < 1e-5


def test_trajectory_samples_and_flags():
    params = osc.family_params("B", 1, 4)
    traj, report = en.run_search(params, 0, queries=2, samples_per_interval=4)
    assert len(traj) == 9
    np.testing.assert_array_equal(traj.at_taps(), [0, 4, 8])
    assert report.gain_vs_time.shape == (3,)
    assert report.stop_time == pytest.approx(2 * math.pi)


def test_schedule_validation():
    with pytest.raises(InvalidParameterError):
        en.TapSchedule(-1.0, 1, (0,))
    with pytest.raises(InvalidParameterError):
        en.TapSchedule(1.0, -1, (0,))
    with pytest.raises(InvalidParameterError):
        en.run_search(osc.family_params("B", 1, 4), 0, queries=-2)
    with pytest.raises(TargetIndexError):
        en.run_search(osc.family_params("B", 1, 4), 7, queries=1)
