ACCEPTANCE_KEY = "acceptance"
_lines = {}


def pytest_runtest_logreport(report):
    if report.when == "call":
        for key, value in report.user_properties:
            if key == ACCEPTANCE_KEY:
                _lines[value[0]] = value[1]


def pytest_terminal_summary(terminalreporter):
    if _lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_lines):
            terminalreporter.write_line(_lines[n])
