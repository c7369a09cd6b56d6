import numpy as np
import pytest

from ctsumproduct import ObservationTrace, cftr, chain3, loop3

ACCEPTANCE_LINES = []


@pytest.fixture
def cftr_model():
    return cftr()


@pytest.fixture
def chain_model():
    return chain3(1.0, 2.0)


@pytest.fixture
def loop_model():
    return loop3(1.0, 2.0)


def hidden_sojourn_trace(T, pad=1.0):
    """Observed 1, hidden for ``T``, observed 1 again."""
    return ObservationTrace(1, [pad, pad + T], T + 2 * pad)


def random_generator(rng, n, density=0.7):
    W = rng.exponential(1.0, size=(n, n)) * (rng.random((n, n)) < density)
    # a cycle keeps the chain irreducible
    for i in range(n):
        W[(i + 1) % n, i] += rng.uniform(0.2, 2.0)
    np.fill_diagonal(W, 0.0)
    W -= np.diag(W.sum(axis=0))
    return W


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
