from __future__ import annotations

from fractions import Fraction as F

import pytest
from hypothesis import HealthCheck, settings

from linmeans import fixtures

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def abc():
    return fixtures.abc()


@pytest.fixture
def abc_three():
    return fixtures.abc_three()


@pytest.fixture
def one_d():
    return fixtures.one_d()


@pytest.fixture
def one_d_bad():
    return fixtures.one_d_inconsistent()


@pytest.fixture
def u2():
    return fixtures.u2()


def vec(*xs):
    return tuple(F(x) for x in xs)


ACCEPTANCE: dict[int, str] = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} ({detail})"
    print(ACCEPTANCE[criterion])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
