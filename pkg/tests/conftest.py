import sys

import pytest

from zcovers.numfield import QQ, Field

_REPORT = []


@pytest.fixture(scope="session")
def qsqrt2():
    return Field([-2, 0, 1], (1, 2))


@pytest.fixture(scope="session")
def qphi():
    return Field([-1, -1, 1], (1, 2))


def report(number, title, ok, detail=""):
    line = f"[acceptance {number:2d}] {'PASS' if ok else 'FAIL'}  {title}"
    if detail:
        line += f"  ({detail})"
    _REPORT.append(line)
    sys.stdout.write(line + "\n")
    sys.stdout.flush()


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_REPORT):
            terminalreporter.write_line(line)
