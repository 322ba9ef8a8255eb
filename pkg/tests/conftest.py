from pathlib import Path

import pytest
from hypothesis import settings

from qecc_tracer.circuit import parse_qasm

# the numba kernels compile on first call, which would trip per-example deadlines
settings.register_profile("default", deadline=None)
settings.load_profile("default")

BENCH_DIR = Path(__file__).resolve().parents[1] / "src" / "qecc_tracer" / "benchmarks"

WORKED_EXAMPLE = "qubit 2\nh q0\nx q1\ncnot q0,q1\nx q1\ncnot q0,q1\n"

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def worked_circuit():
    return parse_qasm(WORKED_EXAMPLE)


@pytest.fixture
def bench_dir():
    return BENCH_DIR


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
