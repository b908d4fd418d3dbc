"""Shared pytest plumbing: surface acceptance verdicts past output capture."""

ACCEPTANCE_VERDICTS: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)
