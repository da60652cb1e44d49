import pytest

_acceptance_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.fspath.basename == "test_acceptance.py":
        label = (item.function.__doc__ or item.name).strip().splitlines()[0]
        _acceptance_results.append((report.passed, label))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for passed, label in _acceptance_results:
        terminalreporter.write_line(("PASS  " if passed else "FAIL  ") + label)
