import numpy as np
import pytest

from qratchet import dynamics, fock
from qratchet.fock import DensityMatrix, Space


def random_density(dim, rng, space=Space.A, rank=None):
    """Random mixed state: normalised G G^dag for complex Gaussian G."""
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(space, m / np.trace(m).real)


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


@pytest.fixture(autouse=True)
def _restore_tolerances():
    saved = fock.tolerances
    yield
    fock.tolerances = saved


@pytest.fixture(autouse=True, scope="module")
def _fresh_propagator_cache():
    yield
    dynamics.clear_propagator_cache()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
