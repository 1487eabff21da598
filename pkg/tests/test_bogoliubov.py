import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from qratchet import bogoliubov, dynamics, fock
from qratchet.bogoliubov import _full_map
from qratchet.dynamics import ModelParams
from qratchet.errors import UnstableCoupling, ValidationError
from qratchet.fock import Space, SpaceSpec

FIG1 = ModelParams(1.0, 2.0, 0.2)


def stable_params():
    """Frequencies in [0.3, 3] and |g| below 90% of the stability bound."""
    return st.tuples(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(-0.9, 0.9)).map(
        lambda v: ModelParams(v[0], v[1], v[2] * 0.5 * math.sqrt(v[0] * v[1])))


def phase_space_heisenberg(params, t):
    """Map v(0) -> v(t), v = (a^dag, a, b^dag, b), from Hamilton's equations.

    Independent of the normal-mode algebra: x'' = -K x integrated by expm.
    """
    wa, wb = params.omega_a, params.omega_b
    gamma = 2 * params.g * math.sqrt(wa * wb)
    k = np.array([[wa**2, gamma], [gamma, wb**2]])
    gen = np.block([[np.zeros((2, 2)), np.eye(2)], [-k, np.zeros((2, 2))]])
    flow = expm(gen * t)  # (x_a, x_b, p_a, p_b)
    to_ladder = np.array([
        [math.sqrt(wa / 2), 0, -1j / math.sqrt(2 * wa), 0],
        [math.sqrt(wa / 2), 0, 1j / math.sqrt(2 * wa), 0],
        [0, math.sqrt(wb / 2), 0, -1j / math.sqrt(2 * wb)],
        [0, math.sqrt(wb / 2), 0, 1j / math.sqrt(2 * wb)],
    ])
    return to_ladder @ flow @ np.linalg.inv(to_ladder)


def test_fig1_frequencies_are_stiffness_eigenvalues():
    modes = bogoliubov.sb_normal_modes(FIG1)
    w2 = np.linalg.eigvalsh(bogoliubov.stiffness_matrix(FIG1))
    assert modes.omega_A == pytest.approx(math.sqrt(w2[0]), abs=1e-14)
    assert modes.omega_B == pytest.approx(math.sqrt(w2[1]), abs=1e-14)
    assert modes.variant == "stiffness"
    assert modes.gamma == pytest.approx(2 * 0.2 * math.sqrt(2))


def test_printed_variant_reported_but_not_selected():
    variants = bogoliubov.frequency_variants(FIG1)
    assert variants["stiffness"]["residual"] < 1e-12
    assert variants["printed"]["residual"] > 1e-3


def test_mixing_angle_edge_cases():
    assert bogoliubov.mixing_angle(ModelParams(1.0, 2.0, 0.0)) == 0.0
    assert bogoliubov.mixing_angle(ModelParams(1.5, 1.5, 0.1)) == pytest.approx(math.pi / 4)
    assert bogoliubov.mixing_angle(ModelParams(1.5, 1.5, -0.1)) == pytest.approx(math.pi / 4)
    th = bogoliubov.mixing_angle(ModelParams(2.0, 1.0, 0.2))
    assert -math.pi / 4 < th < 0


def test_uncoupled_modes_are_the_bare_oscillators():
    p = ModelParams(1.3, 0.7, 0.0)
    modes = bogoliubov.sb_normal_modes(p)
    assert (modes.omega_A, modes.omega_B) == pytest.approx((1.3, 0.7))
    assert modes.chi == pytest.approx(0.0) and modes.chi_prime == pytest.approx(0.0)
    coeffs = bogoliubov.heisenberg_coeffs(modes, 2.0)
    np.testing.assert_allclose(coeffs.alpha, [np.exp(-1.3j * 2.0), 0, 0, 0], atol=1e-14)


def test_degenerate_frequencies_diagonalise():
    p = ModelParams(1.5, 1.5, 0.3)
    modes = bogoliubov.sb_normal_modes(p)
    assert bogoliubov.validate_diagonalization(modes, p).residual < 1e-12


def test_unstable_coupling_raises():
    bound = math.sqrt(1.0 * 2.0) / 2
    with pytest.raises(UnstableCoupling):
        bogoliubov.sb_normal_modes(ModelParams(1.0, 2.0, bound * 1.01))
    with pytest.raises(UnstableCoupling):
        bogoliubov.check_stability(ModelParams(1.0, 2.0, 0.8))
    bogoliubov.check_stability(ModelParams(1.0, 2.0, 0.8, "jc"))


def test_jc_params_rejected_for_squeezing():
    with pytest.raises(ValidationError):
        bogoliubov.sb_normal_modes(ModelParams(1.0, 2.0, 0.2, "jc"))


@settings(max_examples=60, deadline=None)
@given(params=stable_params())
def test_diagonalisation_residual_is_round_off(params):
    modes = bogoliubov.sb_normal_modes(params)
    assert bogoliubov.validate_diagonalization(modes, params).residual <= 1e-10


def test_truncated_spectrum_matches_normal_mode_ladder():
    modes = bogoliubov.sb_normal_modes(FIG1)
    check = bogoliubov.validate_diagonalization(modes, FIG1, levels=25)
    assert check.gap_mismatch < 1e-6
    assert check.ground_mismatch < 1e-6


@settings(max_examples=40, deadline=None)
@given(params=stable_params(), t=st.floats(0.0, 20.0))
def test_heisenberg_map_matches_hamilton_equations(params, t):
    modes = bogoliubov.sb_normal_modes(params)
    coeffs = bogoliubov.heisenberg_coeffs(modes, t)
    heis = np.linalg.inv(_full_map(coeffs))
    np.testing.assert_allclose(heis, phase_space_heisenberg(params, t), atol=1e-9)
    assert max(map(abs, coeffs.commutator_defects())) < 1e-10


def test_commutator_defects_detect_broken_coeffs():
    coeffs = bogoliubov.heisenberg_coeffs(bogoliubov.sb_normal_modes(FIG1), 1.0)
    broken = bogoliubov.HeisenbergCoeffs(coeffs.alpha * 1.01, coeffs.beta, coeffs.t)
    assert abs(broken.commutator_defects()[0]) > 1e-3


def test_analytic_numbers_match_truncated_evolution():
    t, levels = 4.0, 30
    modes = bogoliubov.sb_normal_modes(FIG1)
    n_a, n_b = bogoliubov.number_via_coeffs(2, 1, bogoliubov.heisenberg_coeffs(modes, t))
    spec = SpaceSpec.square(levels)
    rho0 = fock.tensor_state(fock.fock_state(2, levels), fock.fock_state(1, levels, Space.B))
    rho = dynamics.evolve(rho0, dynamics.cached_propagator(FIG1, spec, t))
    ra, rb = fock.marginals(rho, spec)
    assert n_a == pytest.approx(fock.mean_number(ra), abs=1e-6)
    assert n_b == pytest.approx(fock.mean_number(rb), abs=1e-6)


def test_vacuum_gains_squeezing_excitations():
    # counter-rotating terms populate the bare vacuum at any t > 0
    modes = bogoliubov.sb_normal_modes(FIG1)
    n_a, n_b = bogoliubov.number_via_coeffs(0, 0, bogoliubov.heisenberg_coeffs(modes, 1.3))
    assert n_a > 0 and n_b > 0


def test_support_audit_reports_mass_above_bound():
    audit = bogoliubov.support_audit(FIG1, 2, 1, 4.0, levels=20)
    assert 0 < audit.mass_either_above < 0.1
    assert audit.mass_either_above >= max(audit.mass_a_above, audit.mass_b_above)
    assert audit.mass_either_above <= audit.mass_a_above + audit.mass_b_above + 1e-15


def test_jc_audit_finds_nothing_above_bound():
    audit = bogoliubov.support_audit(ModelParams(1.0, 2.0, 0.2, "jc"), 2, 1, 4.0, levels=8)
    assert audit.mass_either_above < 1e-14


@pytest.mark.parametrize("wa, wb, g", [(1.0, 2.0, 0.2), (2.0, 1.0, 0.3), (1.0, 1.0, 0.1), (1.0, 2.0, 0.0),
                                       (1.0, 2.0, -0.4)])
def test_jc_rotation_removes_cross_term(wa, wb, g):
    p = ModelParams(wa, wb, g, "jc")
    psi = bogoliubov.jc_rotation(p)
    assert abs(bogoliubov.jc_cross_term(p, psi)) < 1e-14
