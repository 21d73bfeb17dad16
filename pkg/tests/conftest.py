import numpy as np
import pytest

_ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


class CriterionReport:
    def __init__(self, number, title):
        self.number = number
        self.title = title

    def check(self, ok, detail):
        status = "PASS" if ok else "FAIL"
        line = f"criterion {self.number:>2} {status}: {self.title}; {detail}"
        _ACCEPTANCE[self.number] = line
        print(line)
        assert ok, line


@pytest.fixture
def criterion():
    return CriterionReport


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[key])
