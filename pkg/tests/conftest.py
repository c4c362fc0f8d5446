import numpy as np
import pytest

from qgames.engine import PD_OUTCOMES, flip_game
from qgames.linalg import StateVector, UnitaryOperator

ACCEPTANCE_LINES: list[str] = []

SQRT_HALF = np.sqrt(0.5)
# CNOT (H x I): sends |00> to (|00> + |11>)/sqrt(2)
BELL_ENTANGLER = SQRT_HALF * np.array(
    [[1, 0, 1, 0], [0, 1, 0, 1], [0, 1, 0, -1], [1, 0, -1, 0]], dtype=complex
)


def entangled_input() -> StateVector:
    return StateVector(np.array([np.sqrt(3 / 5), 0, 0, np.sqrt(2 / 5)], dtype=complex))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def bell_entangler():
    return UnitaryOperator(BELL_ENTANGLER)


@pytest.fixture
def pd_classical():
    return flip_game(StateVector.basis(0, 4), PD_OUTCOMES, name="pd_classical")


@pytest.fixture
def pd_entangled():
    return flip_game(entangled_input(), PD_OUTCOMES, name="pd_entangled_3_5")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
