import numpy as np
import pytest

from eprec import data_path
from eprec.core import BINARY, FiniteAlphabet, Involution, encode_text
from eprec.models import MarkovModel, load_model

# Worked examples used throughout: a binary sequence and a pair for waiting times.
EXAMPLE_X = "01001101010011010011101001001010"
EXAMPLE_Y = "11010100010010100110101001001010"


@pytest.fixture
def example_x():
    return encode_text(EXAMPLE_X, BINARY)


@pytest.fixture
def example_y():
    return encode_text(EXAMPLE_Y, BINARY)


@pytest.fixture
def binary_id():
    return Involution.identity(BINARY)


@pytest.fixture(scope="session")
def cycle3():
    return load_model(data_path("cycle3.mk"))


@pytest.fixture(scope="session")
def chargaff4():
    return load_model(data_path("chargaff4.mk"))


def random_chain(rng: np.random.Generator, k: int, alphabet: FiniteAlphabet | None = None,
                 floor: float = 0.02) -> MarkovModel:
    """Full-support chain with Dirichlet rows bounded away from zero."""
    if alphabet is None:
        alphabet = FiniteAlphabet(tuple(str(i) for i in range(k)))
    P = rng.dirichlet(np.ones(k), size=k) + floor
    P /= P.sum(axis=1, keepdims=True)
    return MarkovModel(alphabet, P)


def random_reversible_chain(rng: np.random.Generator, k: int) -> MarkovModel:
    """Random walk on a complete graph with symmetric positive weights."""
    W = rng.uniform(0.1, 1.0, size=(k, k))
    W = W + W.T
    P = W / W.sum(axis=1, keepdims=True)
    pi = W.sum(axis=1) / W.sum()
    return MarkovModel(FiniteAlphabet(tuple(str(i) for i in range(k))), P, pi)


# One line per acceptance criterion, printed at the end of the session.
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=int):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
