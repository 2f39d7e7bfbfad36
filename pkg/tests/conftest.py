import warnings

import pytest

from wiretap_ldpc.pipeline import ingest_reference_designs
from wiretap_ldpc.reference import load_working_points


@pytest.fixture(scope="session")
def reference_designs():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return ingest_reference_designs()


@pytest.fixture(scope="session")
def working_points():
    return load_working_points()


def design_for(designs, rs, rb):
    return next(d for d in designs if abs(d.secret_rate - rs) < 1e-12 and abs(d.bob_rate - rb) < 1e-12)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def record_acceptance(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
