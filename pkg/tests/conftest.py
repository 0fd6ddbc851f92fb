"""Shared pytest wiring: the acceptance scorecard summary section."""

SCORECARD: list[str] = []


def record_scorecard(line: str) -> None:
    SCORECARD.append(line)


def pytest_terminal_summary(terminalreporter):
    # one visible line per criterion even when capture swallows test output
    if SCORECARD:
        terminalreporter.section("acceptance scorecard")
        for line in SCORECARD:
            terminalreporter.write_line(line)
