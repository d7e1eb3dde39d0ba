import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> [title, all tests passed so far, tests seen]
_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    entry = _CRITERIA.setdefault(num, [title, True, 0])
    if rep.when == "call":
        entry[2] += 1
    if rep.failed or (rep.when == "call" and rep.skipped):
        entry[1] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(_CRITERIA):
        title, ok, seen = _CRITERIA[num]
        status = "PASS" if ok and seen else "FAIL"
        terminalreporter.write_line(f"criterion {num:>2} {status}  {title} ({seen} test(s))")
