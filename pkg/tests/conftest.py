import time

import pytest

_START = time.perf_counter()
SUITE_BUDGET_S = 600.0

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
N_CRITERIA = 11


@pytest.fixture
def acceptance():
    def record(k: int, ok: bool, detail: str) -> bool:
        ACCEPTANCE[k] = (bool(ok), detail)
        return bool(ok)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    elapsed = time.perf_counter() - _START
    if 11 in ACCEPTANCE:
        ok, detail = ACCEPTANCE[11]
        ACCEPTANCE[11] = (ok and elapsed < SUITE_BUDGET_S,
                          f"{detail}; suite wall time {elapsed:.0f} s (limit {SUITE_BUDGET_S:.0f} s)")
    terminalreporter.section("acceptance criteria")
    for k in range(1, N_CRITERIA + 1):
        if k in ACCEPTANCE:
            ok, detail = ACCEPTANCE[k]
            terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'} | {detail}")
        else:
            terminalreporter.write_line(f"criterion {k:2d}: NOT RUN")
