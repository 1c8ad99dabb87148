"""Timing and pass/fail bookkeeping for the acceptance criteria."""
from __future__ import annotations

import contextlib
import time

RESULTS: dict[int, tuple[str, str, float, float]] = {}


@contextlib.contextmanager
def criterion(number: int, title: str, budget: float):
    """Time the body, record the outcome, then enforce the runtime budget."""
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        RESULTS[number] = ("FAIL", title, time.perf_counter() - started, budget)
        raise
    elapsed = time.perf_counter() - started
    RESULTS[number] = ("PASS" if elapsed < budget else "FAIL", title, elapsed, budget)
    assert elapsed < budget, f"criterion {number} took {elapsed:.2f} s (budget {budget:g} s)"
