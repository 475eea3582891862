"""Shared test plumbing: per-criterion pass/fail lines for the acceptance suite."""

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def record_acceptance(name: str, detail: str) -> None:
    _ACCEPTANCE_RESULTS[name] = detail


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    detail = _ACCEPTANCE_RESULTS.get(name, "")
    _ACCEPTANCE_RESULTS[name] = f"{'PASS' if report.passed else 'FAIL'} {name} {detail}".strip()


def pytest_terminal_summary(terminalreporter):
    lines = [v for v in _ACCEPTANCE_RESULTS.values() if v.startswith(("PASS", "FAIL"))]
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in sorted(lines):
        terminalreporter.write_line(line)
