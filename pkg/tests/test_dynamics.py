import math
import threading
import warnings

import numpy as np
import pytest
from scipy.linalg import expm

from qratchet import dynamics, fock
from qratchet.dynamics import Coupling, ModelParams, TruncationGuard
from qratchet.errors import TruncationOverflow, TruncationWarning, ValidationError
from qratchet.fock import Operator, Space, SpaceSpec

from conftest import random_density


def test_model_params_validation():
    with pytest.raises(ValidationError):
        ModelParams(-1.0, 2.0, 0.1)
    with pytest.raises(ValidationError):
        ModelParams(1.0, 0.0, 0.1)
    with pytest.raises(ValidationError):
        ModelParams(1.0, 2.0, float("inf"))
    assert ModelParams(1.0, 2.0, 0.1, "jc").coupling is Coupling.JAYNES_CUMMINGS


def test_sb_hamiltonian_matrix_elements():
    spec = SpaceSpec.square(3)
    h = dynamics.build_hamiltonian(ModelParams(1.0, 2.0, 0.1), spec).matrix
    idx = lambda na, nb: na * 3 + nb  # noqa: E731
    assert h[idx(1, 2), idx(1, 2)] == pytest.approx(1 * 1.0 + 2 * 2.0)
    # g (a^dag + a)(b^dag + b): <1,1|H|0,0> = g, <2,1|H|1,0> = g sqrt(2)
    assert h[idx(1, 1), idx(0, 0)] == pytest.approx(0.1)
    assert h[idx(2, 1), idx(1, 0)] == pytest.approx(0.1 * math.sqrt(2))
    assert h[idx(1, 0), idx(0, 1)] == pytest.approx(0.1)


def test_jc_hamiltonian_has_no_counter_rotating_terms():
    spec = SpaceSpec.square(3)
    h = dynamics.build_hamiltonian(ModelParams(1.0, 2.0, 0.1, "jc"), spec).matrix
    n_tot = np.add.outer(np.arange(3), np.arange(3)).ravel()
    off = np.abs(h) * (n_tot[:, None] != n_tot[None, :])
    assert off.max() == 0.0


def test_factored_coupling_reproduces_full_coupling():
    spec = SpaceSpec(4, 5)
    ops = dynamics.model_operators(ModelParams(1.0, 2.0, 0.3), spec)
    np.testing.assert_allclose(fock.tensor_operator(ops.v_a, ops.v_b).matrix, ops.v.matrix, atol=1e-14)


def test_propagator_matches_expm(rng):
    h = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    op = Operator(Space.AB, h + h.conj().T)
    u = dynamics.propagator(op, 0.7)
    np.testing.assert_allclose(u.matrix, expm(-0.7j * op.matrix), atol=1e-12)
    assert u.unitarity_error() < 1e-13


def test_propagator_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        dynamics.propagator(Operator(Space.AB, np.array([[0, 1], [0, 0]])), 1.0)


def test_jc_resonant_single_excitation_swaps_as_cos_squared():
    g, t = 0.3, 2.1
    spec = SpaceSpec.square(3)
    params = ModelParams(1.5, 1.5, g, "jc")
    rho0 = fock.tensor_state(fock.fock_state(1, 3), fock.fock_state(0, 3, Space.B))
    rho = dynamics.evolve(rho0, dynamics.propagator(dynamics.build_hamiltonian(params, spec), t))
    ra, rb = fock.marginals(rho, spec)
    assert fock.mean_number(ra) == pytest.approx(math.cos(g * t) ** 2, abs=1e-13)
    assert fock.mean_number(rb) == pytest.approx(math.sin(g * t) ** 2, abs=1e-13)


def test_jc_detuned_rabi_formula():
    wa, wb, g, t = 1.0, 1.4, 0.25, 3.3
    half_detuning = (wa - wb) / 2
    omega = math.hypot(g, half_detuning)
    transfer = (g / omega) ** 2 * math.sin(omega * t) ** 2
    spec = SpaceSpec.square(2)
    rho0 = fock.tensor_state(fock.fock_state(1, 2), fock.fock_state(0, 2, Space.B))
    u = dynamics.propagator(dynamics.build_hamiltonian(ModelParams(wa, wb, g, "jc"), spec), t)
    _, rb = fock.marginals(dynamics.evolve(rho0, u), spec)
    assert fock.mean_number(rb) == pytest.approx(transfer, abs=1e-13)


def test_evolution_conserves_energy(rng):
    spec = SpaceSpec.square(5)
    params = ModelParams(1.0, 2.0, 0.2)
    h = dynamics.build_hamiltonian(params, spec)
    rho = random_density(25, rng, Space.AB)
    out = dynamics.evolve(rho, dynamics.propagator(h, 3.0))
    assert fock.expectation(out, h).real == pytest.approx(fock.expectation(rho, h).real, abs=1e-12)


def test_cached_propagator_reuses_and_distinguishes_keys():
    dynamics.clear_propagator_cache()
    spec = SpaceSpec.square(4)
    p = ModelParams(1.0, 2.0, 0.2)
    u1 = dynamics.cached_propagator(p, spec, 1.0)
    assert dynamics.cached_propagator(p, spec, 1.0) is u1
    assert dynamics.cached_propagator(p, spec, 2.0) is not u1
    assert dynamics.cached_propagator(ModelParams(1.0, 2.0, 0.2, "jc"), spec, 1.0) is not u1
    with pytest.raises(ValueError):
        u1.matrix[0, 0] = 0


def test_cached_propagator_is_thread_safe():
    dynamics.clear_propagator_cache()
    spec = SpaceSpec.square(6)
    p = ModelParams(1.0, 2.0, 0.2)
    results = []
    threads = [threading.Thread(target=lambda: results.append(dynamics.cached_propagator(p, spec, 0.5)))
               for _ in range(8)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert len({id(u) for u in results}) <= 8
    assert all(np.array_equal(u.matrix, results[0].matrix) for u in results)
    assert dynamics.cached_propagator(p, spec, 0.5) is dynamics.cached_propagator(p, spec, 0.5)


def test_top_level_population():
    spec = SpaceSpec.square(3)
    rho = fock.tensor_state(fock.fock_state(2, 3), fock.fock_state(1, 3, Space.B))
    assert dynamics.top_level_population(rho, spec) == (1.0, 0.0)


def test_truncation_guard_levels():
    guard = TruncationGuard(warn=1e-6, hard=1e-3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert guard.check(1e-7) is False
    with pytest.warns(TruncationWarning):
        assert guard.check(1e-5, 3) is True
    with pytest.raises(TruncationOverflow) as info:
        guard.check(2e-3, 7)
    assert info.value.index == 7
    assert info.value.tail_mass == 2e-3
