"""Shared pytest wiring: repeats the acceptance verdict lines after the run."""


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance")
    for line in RESULTS:
        terminalreporter.write_line(line)
