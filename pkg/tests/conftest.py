import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracle  # noqa: E402

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def oracle_valid3():
    return set(oracle.valid_codes(3))


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def quad_enumeration():
    """Single-shard exact N=4 enumeration, with its wall time in seconds."""
    import time

    from procfn.search import SearchPlan, enumerate_codes

    start = time.perf_counter()
    codes = enumerate_codes(SearchPlan(4))
    return codes, time.perf_counter() - start


@pytest.fixture(scope="session")
def quad_inventory(quad_enumeration):
    from procfn.core import ProcessShape
    from procfn.equivalence import classify_codes

    return classify_codes(ProcessShape.binary(4), quad_enumeration[0])


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record and print the one-line verdict of an acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
