import numpy as np
import pytest

from quotient_spectrum import (
    QuotientProblem,
    TruncationSpec,
    build_finite,
    build_gauss,
    build_mp_induced,
    standard_potentials,
)

# One line per acceptance criterion, filled by tests/test_acceptance.py.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def gauss():
    return build_gauss()


@pytest.fixture(scope="session")
def gauss_pots(gauss):
    return standard_potentials(gauss)


@pytest.fixture(scope="session")
def mp():
    return build_mp_induced(0.5)


@pytest.fixture(scope="session")
def mp_pots(mp):
    return standard_potentials(mp)


@pytest.fixture(scope="session")
def gauss_quotient_small(gauss, gauss_pots):
    """log-digit / digit on a cheap truncation."""
    return QuotientProblem(gauss, gauss_pots["log-digit"], gauss_pots["digit"], TruncationSpec(200, 2))


@pytest.fixture(scope="session")
def mp_quotient(mp, mp_pots):
    return QuotientProblem(mp, mp_pots["mp-sum"], mp_pots["return-time"], TruncationSpec(250, 2))


@pytest.fixture
def two_symbol():
    """Affine model with branches of lengths 0.4 and 0.5 and tables phi=(0,1), one=(1,1)."""
    return build_finite([(0.0, 0.4), (0.5, 1.0)], {"phi": [0.0, 1.0], "one": [1.0, 1.0]})


def random_finite(rng: np.random.Generator, size: int, columns=("phi", "psi")):
    """Random affine model with ``size`` ordered, disjoint branches and random tables."""
    cuts = np.sort(rng.uniform(0.0, 1.0, 2 * size))
    intervals = cuts.reshape(size, 2)
    tables = {"phi": rng.normal(size=size), "psi": rng.uniform(0.5, 2.0, size)}
    return build_finite(intervals, {c: tables[c] for c in columns})
