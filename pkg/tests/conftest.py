import os
import sys
from importlib import resources

import pytest

from otsbm.model import parse_network

sys.path.insert(0, os.path.dirname(__file__))

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def bundled(name: str):
    return parse_network((resources.files("otsbm") / "data" / f"{name}.json").read_text(encoding="utf-8"))


@pytest.fixture
def tri3():
    return bundled("tri3")


@pytest.fixture
def ring4():
    return bundled("ring4")
