import warnings

import numpy as np
import pytest

from elliptica.solver import StabilityWarning

ACCEPTANCE = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def record_criterion():
    def record(number, name, passed, detail=""):
        ACCEPTANCE.append((number, name, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {name} {detail}")

    return record


@pytest.fixture
def quiet_stability():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StabilityWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {number}. {name}  {detail}")
