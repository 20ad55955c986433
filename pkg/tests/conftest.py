import re

_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[report.nodeid] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    rows = []
    for nodeid, outcome in _ACCEPTANCE.items():
        m = re.search(r"test_criterion_(\d+)_(\w+)", nodeid)
        rows.append((int(m.group(1)), m.group(2).replace("_", " "), outcome))
    for num, title, outcome in sorted(rows):
        terminalreporter.write_line(f"criterion {num:2d} {outcome}  {title}")
    passed = sum(r[2] == "PASS" for r in rows)
    terminalreporter.write_line(f"{passed}/{len(rows)} criteria pass")
