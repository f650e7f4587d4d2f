import numpy as np
import pytest

from magicpoly.stabilizers import load_or_enumerate, stabilizer_set

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def stabs1():
    return stabilizer_set(1)


@pytest.fixture(scope="session")
def stabs2():
    return stabilizer_set(2)


@pytest.fixture(scope="session")
def stabs3():
    return stabilizer_set(3)


@pytest.fixture(scope="session")
def stabs5(tmp_path_factory):
    path = tmp_path_factory.mktemp("cache") / "stabilizers_N5.bin"
    return load_or_enumerate(5, path, allow_large=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def acceptance():
    """Record one PASS/FAIL line per criterion, printed in the terminal summary."""

    def record(name: str, ok: bool, detail: str = ""):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
