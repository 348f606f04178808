"""Prints one pass/fail line per acceptance criterion at the end of the run."""
import re

_CRITERIA = {}


def pytest_runtest_logreport(report):
    match = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not match:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        # parametrized criteria pass only if every case passes
        _CRITERIA.setdefault(int(match.group(1)), []).append((report.outcome == "passed", detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        runs = _CRITERIA[number]
        status = "PASS" if all(ok for ok, _ in runs) else "FAIL"
        detail = " | ".join(d for _, d in runs if d)
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {detail}")
