import os
import sys
from collections import defaultdict

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

_CRITERIA = {
    1: "propriety",
    2: "homogeneity, supporting inequality, convexity",
    3: "baselines",
    4: "log-rule compatibility of f = x quasi-Bregman families",
    5: "Bregman families with f = x^2 g''",
    6: "stationarity transfer",
    7: "Hessian identity",
    8: "estimation closed forms",
    9: "portfolio domination",
    10: "gradient hygiene",
    11: "m = 2 degeneracy",
    12: "command line",
}

_results: dict[int, list[tuple[str, str]]] = defaultdict(list)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_runtest_logreport(report):
    crit = getattr(report, "_criterion", None)
    if crit is None:
        return
    if report.when == "call" or not report.passed:
        outcome = "failed" if report.failed else ("skipped" if report.skipped else "passed")
        _results[crit].append((report.nodeid, outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result()._criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        rows = _results.get(n)
        if not rows:
            continue
        failed = [nodeid for nodeid, out in rows if out == "failed"]
        verdict = "FAIL" if failed else "PASS"
        terminalreporter.write_line(
            f"criterion {n:2d} {verdict}  {len(rows) - len(failed)}/{len(rows)} checks  ({_CRITERIA[n]})"
        )
        for nodeid in failed:
            terminalreporter.write_line(f"    failed: {nodeid}")
