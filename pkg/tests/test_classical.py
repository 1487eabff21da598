import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from qratchet import classical
from qratchet.classical import ClassicalParams, ClassicalState, Exponential, Fixed, UniformRange
from qratchet.errors import UnstableCoupling, ValidationError

PARAMS = ClassicalParams(1.0, 2.0, 0.3)


def ode_flow(params, coupled, t):
    """Reference map of (x_a, p_a, x_b, p_b) from the equations of motion."""
    g = params.gamma if coupled else 0.0
    wa2, wb2 = params.omega_a**2, params.omega_b**2
    gen = np.array([[0, 1, 0, 0], [-wa2, 0, -g, 0], [0, 0, 0, 1], [-g, 0, -wb2, 0]], dtype=float)
    return expm(gen * t)


def test_parameter_validation():
    with pytest.raises(UnstableCoupling):
        ClassicalParams(1.0, 2.0, 2.0)
    with pytest.raises(ValidationError):
        ClassicalParams(0.0, 2.0, 0.1)
    with pytest.raises(ValidationError):
        ClassicalParams(1.0, 2.0, 0.1, mean_hold=0.0)
    with pytest.raises(ValidationError):
        UniformRange(2.0, 1.0)
    with pytest.raises(ValidationError):
        Fixed(())
    with pytest.raises(ValidationError):
        ClassicalState(float("nan"), 0, 0, 0)


@settings(max_examples=40, deadline=None)
@given(coupled=st.booleans(), t=st.floats(0.0, 30.0), gamma=st.floats(-1.9, 1.9))
def test_segment_matrix_matches_equations_of_motion(coupled, t, gamma):
    p = ClassicalParams(1.0, 2.0, gamma)
    np.testing.assert_allclose(classical.segment_matrix(p, coupled, t), ode_flow(p, coupled, t), atol=1e-9)


def test_segment_matrix_is_symplectic():
    j = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])
    m = classical.segment_matrix(PARAMS, True, 2.7)
    np.testing.assert_allclose(m.T @ j @ m, j, atol=1e-13)


def test_each_configuration_conserves_its_own_energy():
    s = ClassicalState(0.3, -0.2, 1.1, 0.4)
    out = classical.evolve_segment(s, True, 5.3, PARAMS)
    assert classical.coupled_energy(out, PARAMS) == pytest.approx(classical.coupled_energy(s, PARAMS), rel=1e-13)
    out = classical.evolve_segment(s, False, 5.3, PARAMS)
    assert classical.uncoupled_energy(out, PARAMS) == pytest.approx(classical.uncoupled_energy(s, PARAMS), rel=1e-13)


def test_trajectory_matches_step_by_step_evolution():
    traj = classical.run_toggle_trajectory(PARAMS, 12, index=3)
    s = classical.DEFAULT_INITIAL
    expected = [classical.uncoupled_energy(s, PARAMS)]
    expected_coupled = [classical.coupled_energy(s, PARAMS)]
    for k, h in enumerate(traj.holds):
        s = classical.evolve_segment(s, k % 2 == 1, h, PARAMS)
        expected.append(classical.uncoupled_energy(s, PARAMS))
        expected_coupled.append(classical.coupled_energy(s, PARAMS))
    np.testing.assert_allclose(traj.energies, expected, rtol=1e-12)
    np.testing.assert_allclose(traj.coupled_energies, expected_coupled, rtol=1e-12)


def test_uncoupled_energy_only_changes_after_coupled_segments():
    traj = classical.run_toggle_trajectory(PARAMS, 10)
    e = traj.energies
    # segment k is uncoupled for even k, so E is unchanged across it
    np.testing.assert_allclose(e[1::2], e[0:-1:2], rtol=1e-12)
    assert not np.allclose(e[2::2], e[1:-1:2])


def test_ensemble_members_are_independently_reproducible():
    ens = classical.run_toggle_ensemble(PARAMS, 20, 15)
    for i in (0, 7, 19):
        np.testing.assert_array_equal(ens.energies[i], classical.run_toggle_trajectory(PARAMS, 15, index=i).energies)


def test_seed_changes_holds():
    a = classical.draw_holds(Exponential(), 1.0, 5, seed=1, index=0)
    assert np.array_equal(a, classical.draw_holds(Exponential(), 1.0, 5, seed=1, index=0))
    assert not np.array_equal(a, classical.draw_holds(Exponential(), 1.0, 5, seed=2, index=0))
    assert not np.array_equal(a, classical.draw_holds(Exponential(), 1.0, 5, seed=1, index=1))


def test_hold_laws():
    e = classical.draw_holds(Exponential(), 2.5, 200_000, 0, 0)
    assert e.mean() == pytest.approx(2.5, rel=0.02)
    u = classical.draw_holds(UniformRange(0.5, 1.5), 1.0, 10_000, 0, 0)
    assert u.min() >= 0.5 and u.max() < 1.5
    np.testing.assert_array_equal(classical.draw_holds(Fixed((1.0, 2.0)), 1.0, 5, 0, 0), [1, 2, 1, 2, 1])


def test_half_period_frequency_switch_returns_energy():
    # at omega' for half a period x -> -x, p -> -p; measured energy is unchanged
    w, wp = 1.0, 1.7
    traj = classical.run_freq_switch_trajectory(w, wp, 4, hold_law=Fixed((0.9, math.pi / wp)),
                                                initial=(0.8, 0.3))
    np.testing.assert_allclose(traj.energies, traj.energies[0], rtol=1e-12)


def test_frequency_switching_pumps_energy():
    ens = classical.run_freq_switch_ensemble(1.0, 2.0, 2000, 40, seed=4)
    assert np.mean(ens.energies[:, -1]) > 2 * np.mean(ens.energies[:, 0])


def test_lognormal_diagnostics_on_exact_lognormal_samples(rng):
    sigma = np.array([0.1, 0.5, 1.0])
    e = np.exp(rng.normal(size=(200_000, 1)) * sigma)
    diag = classical.lognormal_diagnostics(e)
    np.testing.assert_allclose(diag.var_log, sigma**2, rtol=0.02)
    np.testing.assert_allclose(diag.ratio, np.exp(sigma**2 / 2), rtol=0.01)
    assert all(abs(diag.z_score(k)) < 4 for k in range(3))


def test_lognormal_diagnostics_detect_non_lognormal(rng):
    e = rng.exponential(size=(50_000, 1))
    assert abs(classical.lognormal_diagnostics(e).z_score()) > 5


def test_lognormal_diagnostics_need_enough_trajectories():
    with pytest.raises(ValidationError):
        classical.lognormal_diagnostics(np.ones((10, 3)))


def test_lognormal_se_matches_bootstrap(rng):
    e = np.exp(0.7 * rng.normal(size=(2000, 1)))
    se = classical.lognormal_diagnostics(e).log_gap_se[0]
    boots = [classical.lognormal_diagnostics(e[rng.integers(0, 2000, 2000)]).log_gap[0] for _ in range(300)]
    assert se == pytest.approx(np.std(boots), rel=0.2)


def test_walk_fits_on_synthetic_random_walk(rng):
    steps = rng.normal(0.0, 0.1, size=(5000, 100))
    e = np.exp(np.concatenate([np.zeros((5000, 1)), np.cumsum(steps, axis=1)], axis=1))
    fits = classical.walk_fits(classical.lognormal_diagnostics(e), mean_hold=2.0)
    assert fits.variance.slope == pytest.approx(0.01, rel=0.05)
    assert fits.growth.slope == pytest.approx(0.005, rel=0.1)
    assert abs(fits.drift.slope) < 1e-3
    assert fits.diffusion_per_time == pytest.approx(fits.diffusion_per_toggle / 2)


def test_toggle_ensemble_energy_grows():
    ens = classical.run_toggle_ensemble(PARAMS, 2000, 100, backend="numpy")
    diag = classical.lognormal_diagnostics(ens)
    fits = classical.walk_fits(diag)
    assert fits.variance.slope > 0 and fits.growth.slope > 0
