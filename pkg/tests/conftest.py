import time

SUITE_BUDGET_S = 300.0
_START = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.perf_counter() - _START
    status = "PASS" if elapsed < SUITE_BUDGET_S else "FAIL"
    terminalreporter.write_line(
        f"ACCEPTANCE 7 (suite wall time) {status}: {elapsed:.1f} s for the whole run, budget {SUITE_BUDGET_S:.0f} s"
    )
