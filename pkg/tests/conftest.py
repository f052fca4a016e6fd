import numpy as np
import pytest

from qdcel.liouvillian import SystemParams
from qdcel.phonon import PhononBathParams, build_tables


@pytest.fixture(scope="session")
def tables5():
    return build_tables(PhononBathParams(temperature=5.0))


@pytest.fixture(scope="session")
def tables20():
    return build_tables(PhononBathParams(temperature=20.0))


@pytest.fixture
def desk2():
    """Desk parameters at the smallest useful truncation."""
    return SystemParams(cutoff1=2, cutoff2=2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_density(dim, rng, rank=None):
    rank = dim if rank is None else rank
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_hermitian(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return a + a.conj().T


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
