"""Acceptance bookkeeping: one PASS/FAIL line per criterion at the end of the run."""

from collections import OrderedDict

import pytest

_CRITERIA = OrderedDict()


def _entry(key):
    return _CRITERIA.setdefault(key, {"title": "", "ok": True, "ran": 0, "details": []})


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    key, title = marker.args[0], marker.kwargs.get("title", "")
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry = _entry(key)
        entry["title"] = entry["title"] or title
        entry["ran"] += 1
        if report.outcome != "passed":
            entry["ok"] = False
        entry["details"].extend(v for k, v in item.user_properties if k == "detail")


@pytest.fixture
def detail(request):
    """Attach a measured-value note to the current acceptance test."""

    def add(text):
        request.node.user_properties.append(("detail", text))

    return add


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key, entry in sorted(_CRITERIA.items(), key=lambda kv: int(kv[0])):
        status = "PASS" if entry["ok"] and entry["ran"] else "FAIL"
        tr.write_line(f"[{status}] criterion {key}: {entry['title']} ({entry['ran']} checks)")
        if status == "FAIL" or tr.config.getoption("verbose") > 0:
            for text in entry["details"]:
                tr.write_line(f"    {text}")
