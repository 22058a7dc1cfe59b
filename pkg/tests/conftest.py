"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import re

import pytest

_CRITERIA: dict = {}
_AC = re.compile(r"test_ac(\d+)_")


def pytest_runtest_logreport(report):
    m = _AC.search(report.nodeid)
    if not m:
        return
    key = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        ok = report.passed and not hasattr(report, "wasxfail")
        name = report.nodeid.split("::")[-1]
        _CRITERIA.setdefault(key, []).append((name, ok, getattr(report, "wasxfail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        parts = _CRITERIA[key]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{n}: {'ok' if good else 'FAILED'}" + (f" ({why})" if why else "")
                           for n, good, why in parts)
        tr.write_line(f"AC{key:<3d} {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def timer():
    import time

    class Timer:
        def __enter__(self):
            self.start = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.elapsed = time.perf_counter() - self.start

    return Timer
