import itertools

import pytest

from sculpt.core.sat import Assignment, Clause, SatInstance, generate_instance


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: large-size checks, deselect with -m 'not slow'")


def excluding_clauses(n, keep):
    """Full-width clauses falsified by exactly one assignment each, for all but ``keep``."""
    keep = {a.bits for a in keep}
    clauses = []
    for bits in itertools.product((0, 1), repeat=n):
        if bits in keep:
            continue
        # Literal on x_v is falsified when x_v == bits[v]
        clauses.append(Clause.of(*[-(v + 1) if b else v + 1 for v, b in enumerate(bits)]))
    return clauses


@pytest.fixture
def hand_solution():
    return Assignment.from_string("101")


@pytest.fixture
def hand_instance(hand_solution):
    """Three variables, unique solution 101."""
    return SatInstance(3, excluding_clauses(3, [hand_solution]))


@pytest.fixture
def two_solution_instance():
    """Three variables, solutions 101 and 100 (differing in x2)."""
    keep = [Assignment.from_string("101"), Assignment.from_string("100")]
    return SatInstance(3, excluding_clauses(3, keep))


@pytest.fixture
def unsat_instance():
    return SatInstance(1, [Clause.of(1), Clause.of(-1)])


@pytest.fixture(scope="session")
def usa8():
    return generate_instance(8, 11, target_ns=1)


@pytest.fixture(scope="session")
def usa_corpus():
    """A few generated instances with a unique solution, n in {6, 8}."""
    return [generate_instance(n, seed, target_ns=1) for n in (6, 8) for seed in range(3)]


@pytest.fixture(scope="session")
def multi8():
    return generate_instance(8, 5, target_ns=2)
