import numpy as np
import pytest
from hypothesis import strategies as st

from qline_vbqc import qmath

CRITERIA_LINES: list[str] = []


def random_density(rng: np.random.Generator, dim: int = 4, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@st.composite
def densities(draw, dim=4):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    rank = draw(st.integers(min_value=1, max_value=dim))
    return random_density(np.random.default_rng(seed), dim, rank)


@pytest.fixture
def graph_rho():
    return qmath.projector(qmath.graph_state())


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)
