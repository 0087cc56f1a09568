"""Shared fixtures plus the acceptance-summary hook.

The acceptance tests in test_acceptance.py record one line per criterion;
the hook below prints them after the normal pytest summary so the
pass/fail ledger is visible even with output capture enabled.
"""

from __future__ import annotations

import numpy as np
import pytest

ACCEPTANCE_LINES: list[tuple[int, str, bool]] = []


def record_criterion(number: int, description: str, ok: bool) -> None:
    ACCEPTANCE_LINES.append((number, description, ok))


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, description, ok in sorted(ACCEPTANCE_LINES):
        status = "PASS" if ok else "FAIL"
        tr.write_line(f"criterion {number}: {status} — {description}")
