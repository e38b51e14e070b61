import numpy as np
import pytest

from momentstab.fixtures import EXAMPLE_A, ILL_CONDITIONED_A

ACCEPTANCE_RESULTS = {}


@pytest.fixture
def exA():
    return EXAMPLE_A.copy()


@pytest.fixture
def crazyA():
    return ILL_CONDITIONED_A.copy()


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


def record_acceptance(number: int, passed: bool, detail: str):
    ACCEPTANCE_RESULTS[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if passed else 'FAIL'} | {detail}")
