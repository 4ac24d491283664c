import pytest

ACCEPTANCE: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    criterion = item.get_closest_marker("criterion")
    if criterion is None or report.when != "call":
        return
    number, title = criterion.args
    elapsed = getattr(item, "elapsed", call.duration)
    status = "PASS" if report.passed else "FAIL"
    ACCEPTANCE[number] = f"[{status}] criterion {number:>2}: {title} ({elapsed:.2f} s)"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=int):
        terminalreporter.write_line(ACCEPTANCE[key])
