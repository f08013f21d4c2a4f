"""Shared fixtures: canonical coin systems, a small exact corpus, oracles."""

from fractions import Fraction as F
from itertools import product

import pytest

import sumtails as st

#: pass/fail lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

HALF_COIN = [(F(-1, 2), F(1, 2)), (F(1, 2), F(1, 2))]


@pytest.fixture(scope="session")
def coin():
    """Fair +-1/2 coin."""
    return st.DiscreteRV.from_atoms(HALF_COIN)


@pytest.fixture(scope="session")
def two_coins():
    """Two fair +-1/2 coins (total variance 1/2; not normalized)."""
    return st.make_system([HALF_COIN, HALF_COIN], unit_variance=False)


@pytest.fixture(scope="session")
def four_coins():
    """Four fair +-1/2 coins (total variance exactly 1)."""
    return st.make_system([HALF_COIN] * 4)


@pytest.fixture(scope="session")
def unit_coin():
    """Single fair +-1 coin (variance 1)."""
    return st.make_system([[(F(-1), F(1, 2)), (F(1), F(1, 2))]])


@pytest.fixture(scope="session")
def small_corpus():
    """Forty seeded exact systems, shared across tests."""
    return st.gen_corpus(st.CorpusSpec(seed=2, count=40))


def enumerate_outcomes(rvs):
    """Brute-force oracle: every outcome tuple with its exact probability.

    Independent of the convolution path: walks the full product space.
    Accepts a System or a plain sequence of rvs.
    """
    rvs = rvs.rvs if isinstance(rvs, st.System) else rvs
    pools = [list(zip(rv.values, rv.masses)) for rv in rvs]
    for combo in product(*pools):
        prob = F(1)
        for _, p in combo:
            prob *= p
        yield prob, tuple(x for x, _ in combo)
