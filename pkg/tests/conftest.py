from functools import lru_cache

import numpy as np
import pytest

from tsleig.asymptotics import full_spectrum
from tsleig.oracle import build_toeplitz, eigenvalues
from tsleig.symbol import example_symbol_a1


@lru_cache(maxsize=None)
def a1_symbol():
    return example_symbol_a1()


@lru_cache(maxsize=None)
def a1_oracle(n: int):
    return eigenvalues(build_toeplitz(a1_symbol(), n))


@lru_cache(maxsize=None)
def a1_estimate(n: int):
    return full_spectrum(a1_symbol(), n)


@pytest.fixture(scope="session")
def a1():
    return a1_symbol()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


CRITERIA = {}


def pytest_runtest_logreport(report):
    criterion = dict(report.user_properties).get("criterion")
    if criterion is None or report.when != "call" and not (report.when == "setup" and report.failed):
        return
    CRITERIA[criterion] = (report.outcome, dict(report.user_properties).get("title", ""))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(CRITERIA):
        outcome, title = CRITERIA[key]
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {key:>2}: {mark}  {title}")
