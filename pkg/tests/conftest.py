"""Collects acceptance-criterion outcomes and prints one PASS/FAIL line per criterion."""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_RESULTS: dict = {}
_TITLES: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _TITLES[mark.args[0]] = mark.args[1]
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or report.failed:
        ok = report.passed and _RESULTS.get(crit, True)
        _RESULTS[crit] = ok


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_RESULTS):
        verdict = "PASS" if _RESULTS[crit] else "FAIL"
        terminalreporter.write_line(f"criterion {crit:>2}: {verdict}  {_TITLES.get(crit, '')}")
