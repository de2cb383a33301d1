from __future__ import annotations

import numpy as np
import pytest

from markov_xact.sampling import RandomSource, random_reversible, random_stochastic

P0 = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
TWO_STATE = np.array([[0.7, 0.3], [0.2, 0.8]])
ASYM_TWO = np.array([[0.5, 0.5], [0.7, 0.3]])


def p_eps(eps: float) -> np.ndarray:
    return eps * np.eye(3) + (1 - eps) * P0


def chain_suite(count: int = 100, seed: int = 7):
    """``count`` reversible and ``count`` generic chains with d cycling through 2..12."""
    rev, gen = [], []
    for i in range(count):
        d = 2 + i % 11
        rev.append(random_reversible(d, RandomSource(seed, i)))
        gen.append(random_stochastic(d, RandomSource(seed, 10_000 + i)))
    return rev, gen


@pytest.fixture(scope="session")
def chains():
    return chain_suite(20)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
