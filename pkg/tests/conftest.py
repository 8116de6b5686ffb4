from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from mapsynth.compat import CompatibilityGraph
from mapsynth.extract import CandidateTable
from oracles import ACCEPTANCE_LINES

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def country_code_tables():
    """Country-code tables: B1 and B3 disagree on three codes, B2 spells one name differently."""
    b1 = CandidateTable("B1", (
        ("afghanistan", "afg"), ("albania", "alb"), ("algeria", "alg"),
        ("american samoa", "asa"), ("andorra", "and"), ("angola", "ang"),
    ))
    b2 = CandidateTable("B2", (
        ("afghanistan", "afg"), ("albania", "alb"), ("algeria", "alg"),
        ("american samoa us", "asa"), ("united states virgin islands", "isv"), ("aruba", "aru"),
    ))
    b3 = CandidateTable("B3", (
        ("afghanistan", "afg"), ("albania", "alb"), ("algeria", "dza"),
        ("american samoa", "asm"), ("andorra", "and"), ("angola", "ago"),
    ))
    return b1, b2, b3


@pytest.fixture
def five_table_graph():
    pos = {("B1", "B2"): 0.67, ("B3", "B5"): 0.9, ("B3", "B4"): 0.7, ("B4", "B5"): 0.5}
    neg = {("B1", "B3"): -0.5, ("B2", "B4"): -0.4}
    return CompatibilityGraph(("B1", "B2", "B3", "B4", "B5"), pos, neg)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
