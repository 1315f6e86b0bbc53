"""Acceptance bookkeeping: one PASS/FAIL line per numbered criterion.

Tests in test_acceptance.py carry ``@pytest.mark.criterion(n, budget=seconds)``.
A criterion passes when every one of its tests passed and their summed call
time stays within the budget.  Strict xfails document known display typos
and do not take part.
"""

from __future__ import annotations

import collections

_RESULTS: dict[int, list[tuple[str, str, float]]] = collections.defaultdict(list)
_BUDGET: dict[int, float] = {}
_CRITERION: dict[str, int] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, budget=60): acceptance criterion number n")


def pytest_collection_finish(session):
    for item in session.items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            n = mark.args[0]
            _CRITERION[item.nodeid] = n
            _BUDGET[n] = max(_BUDGET.get(n, 0.0), float(mark.kwargs.get("budget", 60)))


def pytest_runtest_logreport(report):
    n = _CRITERION.get(report.nodeid)
    if n is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _RESULTS[n].append((report.nodeid, report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERION:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(set(_CRITERION.values())):
        runs = _RESULTS.get(n, [])
        if not runs:
            terminalreporter.write_line(f"CRITERION {n}: NOT RUN")
            continue
        elapsed = sum(d for _, _, d in runs)
        ok = all(outcome == "passed" for _, outcome, _ in runs) and elapsed <= _BUDGET[n]
        note = "" if elapsed <= _BUDGET[n] else f" (over budget {_BUDGET[n]:.0f} s)"
        terminalreporter.write_line(f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  [{elapsed:.1f} s]{note}")
