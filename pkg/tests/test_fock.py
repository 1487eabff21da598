import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qratchet import fock
from qratchet.errors import TruncationOverflow, ValidationError
from qratchet.fock import DensityMatrix, Operator, Space, SpaceSpec

from conftest import random_density


def test_annihilation_matrix_elements():
    a = fock.annihilation(5).matrix
    for n in range(1, 5):
        assert a[n - 1, n] == pytest.approx(math.sqrt(n))
    assert np.count_nonzero(a) == 4


def test_commutator_is_identity_except_top_level():
    levels = 7
    a = fock.annihilation(levels)
    comm = (a @ a.dag - a.dag @ a).matrix
    np.testing.assert_allclose(np.diag(comm)[:-1], 1.0, atol=1e-14)
    assert comm[-1, -1] == pytest.approx(-(levels - 1))


def test_number_operator_matches_ladder_product():
    a = fock.annihilation(6)
    np.testing.assert_allclose((a.dag @ a).matrix, fock.number(6).matrix, atol=1e-14)


def test_kron_ordering_is_a_major():
    spec = SpaceSpec(3, 4)
    a_emb, b_emb = fock.ladder_pair(spec)
    # |n_a=1, n_b=2> sits at 1*4 + 2 = 6
    vec = np.zeros(spec.dim)
    vec[6] = 1.0
    n_a = (a_emb.dag @ a_emb).matrix
    n_b = (b_emb.dag @ b_emb).matrix
    assert vec @ n_a @ vec == pytest.approx(1.0)
    assert vec @ n_b @ vec == pytest.approx(2.0)


def test_operator_arrays_are_read_only():
    op = fock.number(3)
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 5.0


def test_operator_space_mismatch_rejected():
    a = fock.annihilation(3)
    b = fock.relabel(a, Space.B)
    with pytest.raises(ValidationError):
        a @ b


def test_embed_dimension_checked():
    with pytest.raises(ValidationError):
        fock.embed(fock.number(4), SpaceSpec(3, 3))


@pytest.mark.parametrize("bad, message", [
    (np.array([[0.5, 0.1], [0.2, 0.5]]), "Hermitian"),
    (np.diag([0.6, 0.6]), "trace"),
    (np.diag([1.1, -0.1]), "eigenvalue"),
])
def test_density_matrix_validation(bad, message):
    with pytest.raises(ValidationError, match=message):
        DensityMatrix(Space.A, bad)


def test_tolerance_override_admits_looser_states():
    loose = np.diag([0.5, 0.5 + 1e-7])
    with pytest.raises(ValidationError):
        DensityMatrix(Space.A, loose)
    previous = fock.set_tolerances(trace=1e-6)
    DensityMatrix(Space.A, loose)
    fock.set_tolerances(**vars(previous))
    with pytest.raises(ValidationError):
        DensityMatrix(Space.A, loose)


def test_partial_trace_of_product_returns_factors(rng):
    ra = random_density(3, rng, Space.A)
    rb = random_density(4, rng, Space.B)
    spec = SpaceSpec(3, 4)
    rho = fock.tensor_state(ra, rb, spec)
    np.testing.assert_allclose(fock.partial_trace(rho, Space.A, spec).matrix, ra.matrix, atol=1e-14)
    np.testing.assert_allclose(fock.partial_trace(rho, Space.B, spec).matrix, rb.matrix, atol=1e-14)


def test_partial_trace_of_bell_like_state_is_maximally_mixed():
    spec = SpaceSpec.square(2)
    psi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    rho = fock.pure_state(psi, Space.AB)
    ra, rb = fock.marginals(rho, spec)
    np.testing.assert_allclose(ra.matrix, np.eye(2) / 2, atol=1e-15)
    assert fock.purity(rb) == pytest.approx(0.5)


def test_partial_trace_wrong_dimension_rejected(rng):
    rho = random_density(6, rng, Space.AB)
    with pytest.raises(ValidationError):
        fock.partial_trace(rho, Space.A, SpaceSpec(3, 3))


@settings(max_examples=40, deadline=None)
@given(la=st.integers(2, 5), lb=st.integers(2, 5), seed=st.integers(0, 2**31))
def test_partial_trace_preserves_local_expectations(la, lb, seed):
    rng = np.random.default_rng(seed)
    spec = SpaceSpec(la, lb)
    rho = random_density(spec.dim, rng, Space.AB)
    h = rng.normal(size=(la, la))
    op_a = Operator(Space.A, h + h.T)
    ra, _ = fock.marginals(rho, spec, renormalize=False)
    assert fock.expectation(ra, op_a) == pytest.approx(fock.expectation(rho, fock.embed(op_a, spec)), abs=1e-12)


def test_renormalised_marginals_absorb_trace_drift(rng):
    spec = SpaceSpec.square(3)
    rho = random_density(9, rng, Space.AB)
    drifted = DensityMatrix(Space.AB, rho.matrix * (1 + 5e-11))
    ra, rb = fock.marginals(drifted, spec)
    assert abs(np.trace(ra.matrix) - 1) < 1e-15
    assert abs(np.trace(rb.matrix) - 1) < 1e-15


def test_fock_state_bounds():
    assert fock.mean_number(fock.fock_state(3, 5)) == 3
    with pytest.raises(ValidationError):
        fock.fock_state(5, 5)


def test_coherent_state_is_poisson():
    z = 0.8 * np.exp(0.3j)
    rho = fock.coherent_state(z, 25)
    n = np.arange(25)
    poisson = np.exp(-abs(z) ** 2) * abs(z) ** (2 * n) / np.array([math.factorial(k) for k in n], dtype=float)
    np.testing.assert_allclose(fock.number_distribution(rho), poisson, atol=1e-15)
    a = fock.annihilation(25)
    assert fock.expectation(rho, a) == pytest.approx(z, abs=1e-12)
    assert fock.purity(rho) == pytest.approx(1.0)


def test_coherent_state_large_amplitude_does_not_overflow():
    rho = fock.coherent_state(12.0, 400)
    assert fock.mean_number(rho) == pytest.approx(144.0, rel=1e-10)


def test_coherent_tail_mass_matches_poisson_sum():
    z, levels = 1.5, 6
    n = np.arange(levels)
    kept = np.sum(np.exp(-z**2) * z ** (2 * n) / np.array([math.factorial(k) for k in n], dtype=float))
    assert fock.coherent_tail_mass(z, levels) == pytest.approx(1 - kept, rel=1e-12)


def test_coherent_state_rejects_heavy_tail():
    with pytest.raises(TruncationOverflow) as info:
        fock.coherent_state(3.0, 10)
    assert info.value.tail_mass > 1e-3


def test_number_distribution_is_clean_diagonal(rng):
    rho = random_density(5, rng)
    p = fock.number_distribution(rho)
    assert p.dtype == float
    assert p.sum() == pytest.approx(1.0)
