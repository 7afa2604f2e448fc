import math
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from relaxed_growth.market import MarketParams  # noqa: E402
from relaxed_growth.reports import efficiency_curve, h_grid  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"
EXAMPLE_MARKETS = {
    "example1": MarketParams(0.08, 0.40),
    "example2": MarketParams(0.08, math.sqrt(2.0 / 15.0)),
}

_criteria: dict[int, tuple[str, str]] = {}
CURVE_TIMING: dict[str, float] = {}
CRITERION_DETAILS: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.fixture(scope="session")
def example_curves():
    """Default-grid efficiency rows for both frictionless examples, computed once."""
    start = time.perf_counter()
    curves = {name: efficiency_curve(mp, 0.0, h_grid()) for name, mp in EXAMPLE_MARKETS.items()}
    CURVE_TIMING["seconds"] = time.perf_counter() - start
    return curves


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed
    if report.when == "call" or failed:
        previous = _criteria.get(number, (None, "PASS"))[1]
        status = "FAIL" if failed or previous == "FAIL" else "PASS"
        if report.skipped:
            status = "SKIP"
        _criteria[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_criteria):
        title, status = _criteria[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")
        if number in CRITERION_DETAILS:
            terminalreporter.write_line(f"    {CRITERION_DETAILS[number]}")
