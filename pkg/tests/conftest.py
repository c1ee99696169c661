import os
import sys
import time

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], print_blob=True
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SUITE_LIMIT = 300.0  # seconds, part of the end-to-end criterion
_start = time.monotonic()


def pytest_sessionstart(session):
    global _start
    _start = time.monotonic()


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    results = dict(module.RESULTS)
    elapsed = time.monotonic() - _start
    if 7 in results and elapsed > SUITE_LIMIT:
        results[7] = (False, results[7][1] + f" (suite took {elapsed:.0f} s)")
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, title = results[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}: criterion {n}: {title}")
    terminalreporter.write_line(f"suite time {elapsed:.1f} s (limit {SUITE_LIMIT:.0f} s)")


def pytest_sessionfinish(session, exitstatus):
    module = sys.modules.get("test_acceptance")
    if module is not None and 7 in module.RESULTS and time.monotonic() - _start > SUITE_LIMIT:
        session.exitstatus = 1
