from __future__ import annotations

import contextlib
import time

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


@contextlib.contextmanager
def criterion(number: int, title: str):
    """Record PASS/FAIL for an acceptance criterion; details go in the yielded dict."""
    detail: dict = {}
    start = time.perf_counter()
    try:
        yield detail
    except BaseException:
        detail["seconds"] = round(time.perf_counter() - start, 2)
        ACCEPTANCE[number] = ("FAIL", title, _fmt(detail))
        raise
    detail["seconds"] = round(time.perf_counter() - start, 2)
    ACCEPTANCE[number] = ("PASS", title, _fmt(detail))


def _fmt(detail: dict) -> str:
    return ", ".join(f"{k}={v}" for k, v in detail.items())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, title, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{status} criterion {number}: {title} ({detail})")
