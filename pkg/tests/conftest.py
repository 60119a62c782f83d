"""Shared pytest plumbing: surfaces the acceptance criterion PASS/FAIL lines
in the terminal summary (per-test prints are captured by pytest)."""

_criterion_lines: list[str] = []


def record_criterion(line: str) -> None:
    _criterion_lines.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)
