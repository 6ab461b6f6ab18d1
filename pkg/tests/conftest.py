_LABELS = {}
_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): end-to-end acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m:
            _LABELS[item.nodeid] = m.args[0]


def pytest_runtest_logreport(report):
    if report.nodeid not in _LABELS:
        return
    if report.when == "call" or report.outcome != "passed":
        prev = _RESULTS.get(report.nodeid)
        if prev is None or prev[0] == "PASS":
            status = {"passed": "PASS", "skipped": "SKIP"}.get(report.outcome, "FAIL")
            _RESULTS[report.nodeid] = (status, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, label in _LABELS.items():
        status, secs = _RESULTS.get(nodeid, ("NOT RUN", 0.0))
        terminalreporter.write_line(f"{status:4s}  {label}  ({secs:.2f} s)")
