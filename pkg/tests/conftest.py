import sys
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = {}


@pytest.fixture
def oracle_dir():
    return DATA / "oracle"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): test stands for one acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (report.when != "call" and not (report.failed or report.skipped)):
        return
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    if report.skipped:
        status = "SKIP"
        reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else str(report.longrepr)
        detail = detail or reason
    else:
        status = "PASS" if report.passed else "FAIL"
        if report.failed and not detail:
            detail = report.longreprtext.strip().splitlines()[-1] if report.longreprtext else ""
    _CRITERIA[mark.args[0]] = f"{status}  {mark.args[0]}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in _CRITERIA.values():
            terminalreporter.write_line(line)
