import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_acceptance = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for key, value in report.user_properties:
        if key == "criterion":
            status = "PASS" if report.passed else "FAIL"
            _acceptance.append(f"{status}  {value}")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_acceptance, key=lambda s: s.split()[1]):
        terminalreporter.write_line(line)
