import warnings

import pytest

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []
    warnings.filterwarnings("ignore", category=RuntimeWarning, module="mpmath")


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def record(criterion: str, passed: bool, detail: str):
        request.config.stash[_RESULTS].append((criterion, bool(passed), detail))
        assert passed, f"{criterion}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash[_RESULTS]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(results, key=lambda r: _order(r[0])):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")


def _order(name: str):
    head = name.split()[1] if name.startswith("criterion") else name
    digits = "".join(ch for ch in head if ch.isdigit())
    return (int(digits) if digits else 99, name)
