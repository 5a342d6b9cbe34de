"""Collects acceptance-criterion outcomes and prints one line per criterion."""

_CRITERIA: dict[str, str] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    label = props.get("criterion")
    if label is None:
        return
    if report.when == "call" or report.failed:
        if report.failed:
            _CRITERIA[label] = "FAIL"
        else:
            _CRITERIA.setdefault(label, "PASS" if report.passed else report.outcome.upper())


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: int(s.split(".")[0])):
        terminalreporter.write_line(f"{_CRITERIA[label]}  criterion {label}")
