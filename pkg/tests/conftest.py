import sys

import pytest


def pytest_addoption(parser):
    parser.addoption("--long-running", action="store_true", default=False,
                     help="also run the slow dim-32/35/39 checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--long-running"):
        return
    skip = pytest.mark.skip(reason="needs --long-running")
    for item in items:
        if "long_running" in item.keywords:
            item.add_marker(skip)


ACCEPTANCE_CRITERIA = 14


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    mod = sys.modules.get("test_acceptance")
    if mod is None:
        return
    results = getattr(mod, "RESULTS", {})
    terminalreporter.section("acceptance criteria")
    for n in range(1, ACCEPTANCE_CRITERIA + 1):
        terminalreporter.write_line(results.get(n, f"criterion {n:>2}: NOT RUN (skipped or deselected)"))
