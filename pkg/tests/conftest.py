"""Shared fixtures and the acceptance summary printed after the run."""

import numpy as np
import pytest

from wrdpg.model import Discrete, Exponential, Normal, Poisson, SbmSpec

# one "criterion N: PASS|FAIL ..." line per acceptance check, in run order
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def two_block_gaussian():
    """700/300 split, sparse off-diagonal block, N(1, sd 0.1) weights."""
    return SbmSpec([0.7, 0.3], [[0.7, 0.1], [0.1, 0.3]], Normal(1.0, 0.1))


def gauss_poisson():
    """Two equal blocks, p = 0.5; Poisson(5.1) inside block 2, N(5, 0.1) elsewhere."""
    g, p = Normal(5.0, 0.1), Poisson(5.1)
    return SbmSpec([0.5, 0.5], np.full((2, 2), 0.5), ((g, g), (g, p)))


def ten_point_pmf():
    probs = np.full(10, 1 / 18)
    probs[4] = 0.5
    return Discrete(tuple(float(v) for v in range(1, 11)), tuple(probs))


def sparse_discrete():
    return SbmSpec([0.7, 0.3], [[0.7, 0.2], [0.2, 0.5]], ten_point_pmf())


def continuous_mixture():
    a, c, e = Normal(6.0, 1.0), Normal(1.0, 0.1), Exponential(1 / 3)
    return SbmSpec([0.7, 0.3], np.ones((2, 2)), ((a, c), (c, e)))
