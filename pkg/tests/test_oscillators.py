import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavesearch import oscillators as osc
from wavesearch.errors import DegenerateStateError, InvalidParameterError


def full_spectrum(params):
    """Eigenvalues of M^-1/2 K M^-1/2 for the whole (N+1)-body system."""
    n, M, K = params.n_items, params.big_mass, params.big_spring
    stiff = np.zeros((n + 1, n + 1))
    stiff[0, 0] = K + n
    stiff[0, 1:] = stiff[1:, 0] = -1.0
    stiff[1:, 1:] = np.eye(n)
    inv_sqrt_m = np.diag(1 / np.sqrt(np.r_[M, np.ones(n)]))
    return np.sort(np.linalg.eigvalsh(inv_sqrt_m @ stiff @ inv_sqrt_m))


def test_family_examples():
    for n in (2, 7, 100):
        a = osc.family_params("A", 1, n)
        assert a.big_mass == pytest.approx(16 * n / 15)
        assert a.big_spring == pytest.approx(3 * n / 5)
        b = osc.family_params("B", 1, n)
        assert b.big_mass == pytest.approx(n / 3)
        assert b.big_spring == 0
        a2 = osc.family_params("A", 2, n)
        assert a2.big_mass == pytest.approx(16 * n / 63)
        assert a2.big_spring == pytest.approx(25 * n / 63)
        sp = osc.spectral(a2)
        assert sp.omega_plus == pytest.approx(2.5, abs=1e-12)
        assert sp.omega_minus == pytest.approx(0.5, abs=1e-12)


def test_family_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        osc.family_params("A", 0, 4)
    with pytest.raises(InvalidParameterError):
        osc.family_params("C", 1, 4)
    with pytest.raises(InvalidParameterError):
        osc.family_params("B", 1, 1)


def test_params_enforce_natural_units():
    with pytest.raises(InvalidParameterError):
        osc.OscillatorParams(4, 1.0, small_mass=2.0)
    with pytest.raises(InvalidParameterError):
        osc.OscillatorParams(4, -1.0)
    with pytest.raises(InvalidParameterError):
        osc.OscillatorParams(4, 1.0, damping=-0.1)


@pytest.mark.parametrize("p", [1, 2, 3, 5])
@pytest.mark.parametrize("n", [2, 4, 33])
def test_family_frequencies_are_rational(p, n):
    a = osc.spectral(osc.family_params("A", p, n))
    assert a.omega_plus == pytest.approx((2 * p + 1) / 2, abs=1e-12)
    assert a.omega_minus == pytest.approx(0.5, abs=1e-12)
    b = osc.spectral(osc.family_params("B", p, n))
    assert b.omega_plus == pytest.approx(2 * p, abs=1e-12)
    assert b.omega_minus == pytest.approx(0.0, abs=1e-12)
    assert a.omega_t == b.omega_t == 1.0


def test_spectral_golden_ratio_case():
    sp = osc.spectral(osc.OscillatorParams(5, 5.0, 5.0))
    assert sp.omega_plus**2 == pytest.approx((3 + math.sqrt(5)) / 2, abs=1e-12)
    assert sp.omega_minus**2 == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(
    n=st.integers(2, 60),
    M=st.floats(0.05, 50),
    K=st.floats(0, 50),
)
def test_spectral_identities_and_full_eigenproblem(n, M, K):
    params = osc.OscillatorParams(n, M, K)
    sp = osc.spectral(params)
    wp2, wm2 = sp.omega_sq
    assert wp2 + wm2 == pytest.approx(1 + (K + n) / M, rel=1e-12, abs=1e-12)
    assert wp2 * wm2 == pytest.approx(K / M, rel=1e-12, abs=1e-12)
    expected = np.sort(np.r_[wp2, wm2, np.ones(n - 1)])
    np.testing.assert_allclose(full_spectrum(params), expected, rtol=1e-9, atol=1e-9)
    # eigenmode coefficients satisfy the reduced eigenproblem
    c = math.sqrt(n / M)
    d = np.array([[(K + n) / M, -c], [-c, 1.0]])
    for coeff, w2 in ((sp.coeff_plus, wp2), (sp.coeff_minus, wm2)):
        np.testing.assert_allclose(d @ coeff, w2 * coeff, atol=1e-9 * (1 + abs(w2)) * np.linalg.norm(coeff))


def test_to_modes_examples():
    params = osc.family_params("B", 1, 4)
    state = osc.initial_conditions("uniform", 1.0, params)
    m = osc.to_modes(state, 2, params)
    assert m.Y_dot == 0
    assert m.ybar_dot == pytest.approx(2.0)
    assert m.y_t_dot == pytest.approx(0.0)
    np.testing.assert_allclose(m.residual_vels, 0.0)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 256), seed=st.integers(0, 2**31), M=st.floats(0.1, 10))
def test_mode_round_trip(n, seed, M):
    rng = np.random.default_rng(seed)
    params = osc.OscillatorParams(n, M, 1.0)
    state = osc.PhaseSpaceState(rng.normal(), rng.normal(), rng.normal(size=n), rng.normal(size=n), 0.3)
    target = int(rng.integers(n))
    modes = osc.to_modes(state, target, params)
    assert modes.residuals.sum() == pytest.approx(-modes.y_t, abs=1e-12 * n)
    back = osc.from_modes(modes)
    np.testing.assert_allclose(back.small_pos, state.small_pos, atol=1e-12)
    np.testing.assert_allclose(back.small_vel, state.small_vel, atol=1e-12)
    assert back.big_pos == pytest.approx(state.big_pos, abs=1e-12)
    assert back.big_vel == pytest.approx(state.big_vel, abs=1e-12)
    assert back.time == state.time


def test_initial_conditions():
    params = osc.family_params("A", 1, 4)
    s = osc.initial_conditions("uniform", 1.0, params)
    assert s.big_vel == 0 and s.big_pos == 0
    np.testing.assert_array_equal(s.small_vel, [1, 1, 1, 1])
    with pytest.raises(InvalidParameterError):
        osc.initial_conditions("translation_free", 1.0, params)
    for n in (3, 10):
        b = osc.family_params("B", 1, n)
        t = osc.initial_conditions("translation_free", 1.0, b)
        assert t.big_vel == pytest.approx(-3.0)
        momentum = b.big_mass * t.big_vel + t.small_vel.sum()
        assert momentum == pytest.approx(0.0, abs=1e-12)


def test_max_gain_examples():
    params = osc.family_params("B", 1, 6)
    uniform = osc.initial_conditions("uniform", 0.7, params)
    assert osc.max_gain(uniform, 3) == pytest.approx(6.0, abs=1e-12)
    two = osc.PhaseSpaceState(0, 0, [0, 0], [1, 0])
    assert osc.max_gain(two, 0) == pytest.approx(1.0, abs=1e-15)
    # vbar = 0 leaves only the relative term
    v = np.array([1.0, -0.25, -0.25, -0.25, -0.25])
    rel = osc.PhaseSpaceState(0, 0, np.zeros(5), v)
    assert osc.max_gain(rel, 0) == pytest.approx(5 / 4, abs=1e-12)
    with pytest.raises(DegenerateStateError):
        osc.max_gain(osc.PhaseSpaceState(0, 0, [0, 0], [0, 1]), 0)


def test_max_gain_is_projection_energy():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(2, 30))
        v = rng.normal(size=n)
        t = int(rng.integers(n))
        s_vec = np.full(n, 1 / math.sqrt(n))
        e_t = np.zeros(n)
        e_t[t] = 1
        basis, _ = np.linalg.qr(np.column_stack([s_vec, e_t]))
        proj = basis @ (basis.T @ v)
        state = osc.PhaseSpaceState(0, 0, np.zeros(n), v)
        assert osc.max_gain(state, t) == pytest.approx(proj @ proj / v[t] ** 2, rel=1e-10)


def test_total_energy_examples():
    b = osc.family_params("B", 1, 4)
    uni = osc.initial_conditions("uniform", 1.0, b)
    assert osc.total_energy(uni, b).total == pytest.approx(2.0, abs=1e-12)
    tf = osc.initial_conditions("translation_free", 1.0, b)
    assert osc.total_energy(tf, b).total == pytest.approx(8.0, abs=1e-12)
    zero = osc.PhaseSpaceState(0, 0, np.zeros(4), np.zeros(4))
    assert osc.total_energy(zero, b).total == 0


def test_energy_ledger_components_sum():
    rng = np.random.default_rng(5)
    params = osc.family_params("A", 2, 9)
    s = osc.PhaseSpaceState(rng.normal(), rng.normal(), rng.normal(size=9), rng.normal(size=9))
    e = osc.total_energy(s, params)
    M, K = params.big_mass, params.big_spring
    direct = (0.5 * M * s.big_vel**2 + 0.5 * K * s.big_pos**2
              + np.sum(0.5 * s.small_vel**2 + 0.5 * (s.small_pos - s.big_pos) ** 2))
    assert e.total == pytest.approx(direct, rel=1e-12)
    assert e.big + e.register_kinetic + e.register_potential == pytest.approx(e.total, abs=1e-12)


def test_phase_space_state_rejects_bad_arrays():
    with pytest.raises(InvalidParameterError):
        osc.PhaseSpaceState(0, 0, [0, 0], [0, 0, 0])
    with pytest.raises(InvalidParameterError):
        osc.PhaseSpaceState(0, float("nan"), [0, 0], [0, 0])
