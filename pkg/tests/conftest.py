import os

import pytest
from hypothesis import HealthCheck, settings

from uspecop import corpus

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# axiom sets that are universal, refinable and extensible
RE_SETS = ["fig3_core", "pipeline", "inorder_commit", "dep_order", "same_addr",
           "core_total", "store_table"]


@pytest.fixture(scope="session")
def domain4():
    return corpus.program("domain4")


@pytest.fixture(scope="session")
def fig3():
    return corpus.axioms("fig3")


@pytest.fixture(scope="session")
def fig5():
    return corpus.program("fig5")


@pytest.fixture(scope="session")
def a_sharp():
    return corpus.axioms("a_sharp")


@pytest.fixture(scope="session")
def pair():
    return corpus.program("pair")


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
