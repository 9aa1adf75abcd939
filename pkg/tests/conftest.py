"""Shared pytest plumbing: collect acceptance-criterion verdicts and print
them in the terminal summary, where output capture cannot swallow them."""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
