"""Test-suite wiring: the acceptance tests register one summary line per
criterion here, and the lines are echoed in the terminal summary so the
pass/fail verdicts are visible even when stdout capture is on."""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
