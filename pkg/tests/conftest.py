"""Per-criterion PASS/FAIL summary for the acceptance suite."""

from collections import defaultdict

import pytest

CRITERIA = {
    1: "reference loss table delta_m (per task and total)",
    2: "controller invariants, >=1000 cases per property",
    3: "analytic vs finite-difference gradients",
    4: "simulator: deepchest beats uniform on the lagging task",
    5: "desk-scale mean total delta_m < 0",
    6: "controller overhead < 1% of MTL training time",
    7: "compare output is byte-identical across runs",
}

_outcomes: dict[int, list[bool]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes[mark.args[0]].append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        results = _outcomes.get(n)
        if not results:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status:<7} {CRITERIA[n]}")
