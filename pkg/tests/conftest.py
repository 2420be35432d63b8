import time

import numpy as np
import pytest

from stot import DensityOperator, ProjectiveMeasurement, TPSMScenario, random_channel, random_pvm, random_state
from stot.operators import matrix_unit

SQ2 = np.sqrt(2)
KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / SQ2
MINUS = np.array([1, -1], dtype=complex) / SQ2


def swap_matrix(d):
    """SWAP on C^d (x) C^d built entry by entry."""
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1
    return s


def plus_minus_pvm():
    return ProjectiveMeasurement([np.outer(PLUS, PLUS), np.outer(MINUS, MINUS)], ["+", "-"])


def random_scenario(seed, dims=(2, 3, 4)):
    """Seeded scenario with random dimensions, state rank, Kraus rank and PVM coarseness."""
    rng = np.random.default_rng(seed)
    da, db = int(rng.choice(dims)), int(rng.choice(dims))
    rank = int(rng.integers(1, da + 1))
    kraus_rank = int(rng.integers(1, 4))
    while db * kraus_rank < da:
        kraus_rank += 1
    return TPSMScenario(
        random_state(da, rank, rng),
        random_pvm(da, int(rng.integers(2, da + 1)), rng),
        random_channel(da, db, kraus_rank, rng),
        random_pvm(db, int(rng.integers(2, db + 1)), rng),
    )


def basis_matrices(d):
    return [matrix_unit(i, j, d) for i in range(d) for j in range(d)]


def random_matrix(rng, rows, cols=None):
    cols = rows if cols is None else cols
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_hermitian(rng, d):
    m = random_matrix(rng, d)
    return (m + m.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def random_scenarios():
    return [random_scenario(seed) for seed in range(200)]


# -- acceptance report ----------------------------------------------------------------------------

ACCEPTANCE = {}
SUITE_BUDGET_SECONDS = 120.0
_session = {}


def record(number, title, passed, detail):
    ACCEPTANCE[number] = (title, bool(passed), detail)
    return passed


def pytest_sessionstart(session):
    _session["start"] = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _session.get("start", time.perf_counter())
    _session["elapsed"] = elapsed
    if 10 in ACCEPTANCE:
        title, passed, detail = ACCEPTANCE[10]
        in_budget = elapsed < SUITE_BUDGET_SECONDS
        ACCEPTANCE[10] = (title, passed and in_budget, f"{detail}; suite ran {elapsed:.1f}s")
        if not in_budget and session.exitstatus == 0:
            session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}: {detail}")
