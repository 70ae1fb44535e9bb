import os
import sys

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, derandomize=True, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_c" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        if report.when == "call" or report.outcome != "passed":
            prior = _ACCEPTANCE.get(name)
            if prior != "FAIL":
                _ACCEPTANCE[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        number = int(name[6:8])
        label = name[9:].replace("_", " ")
        terminalreporter.write_line(f"criterion {number:2d} {label}: {_ACCEPTANCE[name]}")
