from collections import OrderedDict

import pytest

_CRITERIA = OrderedDict()


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _CRITERIA.setdefault(str(mark.args[0]), OrderedDict())[item.nodeid] = None


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    bucket = _CRITERIA[str(mark.args[0])]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        bucket[item.nodeid] = "skipped" if rep.skipped else ("passed" if rep.passed else "failed")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit, results in _CRITERIA.items():
        ran = {k: v for k, v in results.items() if v is not None}
        if not ran:
            continue
        failed = [k.split("::")[-1] for k, v in ran.items() if v != "passed"]
        status = "PASS" if not failed else "FAIL"
        detail = f"{len(ran) - len(failed)}/{len(ran)} checks"
        if failed:
            detail += "; failing: " + ", ".join(failed)
        tr.write_line(f"criterion {crit}: {status} ({detail})")
