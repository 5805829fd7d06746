"""Shared pytest wiring: surface acceptance check lines in the summary."""

RESULT_LINES = []


def pytest_terminal_summary(terminalreporter):
    if RESULT_LINES:
        terminalreporter.section("acceptance checks")
        for line in RESULT_LINES:
            terminalreporter.line(line)
