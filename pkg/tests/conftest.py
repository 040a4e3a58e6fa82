import _criteria


def pytest_terminal_summary(terminalreporter):
    if not _criteria.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria.LINES):
        terminalreporter.write_line(_criteria.LINES[n])
