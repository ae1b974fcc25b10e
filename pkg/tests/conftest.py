import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = "test_acceptance.py::test_criterion_"
    if marker in report.nodeid:
        key = report.nodeid.split(marker, 1)[1].split("_", 1)[0]
        _ACCEPTANCE[int(key)] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        status = "PASS" if _ACCEPTANCE[k] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {k}: {status}")
