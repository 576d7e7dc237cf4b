"""Shared test configuration.

Prints a one-line PASS/FAIL verdict per acceptance criterion at the end of
the run (the criteria live in test_acceptance.py, one test per criterion).
"""
import re

from hypothesis import settings

# quadrature-backed properties can take tens of milliseconds per example;
# the default 200ms deadline is too flaky for CI boxes under load
settings.register_profile("fogloss", deadline=None, max_examples=50)
settings.load_profile("fogloss")

_CRIT = re.compile(r"test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call" and outcome != "error":
                continue
            m = _CRIT.search(rep.nodeid)
            if m:
                k = int(m.group(1))
                # a criterion is PASS only if every one of its tests passed
                results[k] = "PASS" if results.get(k, "PASS") == "PASS" \
                    and outcome == "passed" else "FAIL"
    if not results:
        return
    tr = terminalreporter
    tr.write_sep("=", "acceptance criteria")
    for k in sorted(results):
        tr.write_line(f"criterion {k:2d}: {results[k]}")
