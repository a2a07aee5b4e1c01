import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


# ---------------------------------------------------------------- acceptance summary
# Tests marked ``criterion(n, title)`` are grouped; each criterion passes only if
# every one of its tests passed.  An expected failure counts as FAIL.

_CRITERIA: dict[int, dict] = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call" and not (call.when == "setup" and call.excinfo):
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "notes": []})
    failed = call.excinfo is not None
    if failed:
        entry["ok"] = False
        expected = item.get_closest_marker("xfail") is not None
        entry["notes"].append(item.name + (" [expected failure]" if expected else ""))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["ok"] else "FAIL"
        line = f"criterion {number}: {status}  {entry['title']}"
        if entry["notes"]:
            line += f"  (failing: {', '.join(entry['notes'])})"
        terminalreporter.write_line(line)
