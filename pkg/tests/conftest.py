import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_acceptance" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        key = next((k for k in _acceptance if k.endswith(f"[criterion_{n}]")), None)
        outcome = _acceptance.get(key, "not run")
        status = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"criterion {n:2d}: {status}: {title}")
