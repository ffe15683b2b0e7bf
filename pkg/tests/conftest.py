import re
from pathlib import Path

import pytest

from rgbdnav.cli import builtin_scenario


@pytest.fixture(scope="session")
def bridge_config_path() -> Path:
    return builtin_scenario("bridge")


_criteria: dict[str, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    label, title = marker.args
    failed = report.failed or (report.when == "setup" and report.skipped)
    prev_ok = _criteria.get(label, (title, True))[1]
    if report.when == "call" or failed:
        _criteria[label] = (title, prev_ok and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria, key=lambda s: (int(re.search(r"\d+", s).group()), s)):
        title, ok = _criteria[label]
        terminalreporter.write_line(f"{label:<5} {'PASS' if ok else 'FAIL'}  {title}")
