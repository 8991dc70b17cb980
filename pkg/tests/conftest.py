import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

FIXTURES = HERE / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion; a criterion passes when all its parts do."""
    results: dict = {}
    for outcome in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid or report.when not in ("call", "setup"):
                continue
            number = nodeid.split("test_criterion_")[1].split("_")[0].rstrip("abc")
            ok = outcome == "passed"
            results[number] = results.get(number, True) and ok
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results, key=int):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if results[number] else 'FAIL'}")
