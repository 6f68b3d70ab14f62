import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical check")


@pytest.fixture(scope="session", autouse=True)
def sandwich_ledger():
    """Every grid solve in the session must satisfy the Height/Width sandwich."""
    from pinchlab.moduli import SANDWICH_STATS
    yield SANDWICH_STATS
    assert SANDWICH_STATS["violations"] == 0, SANDWICH_STATS


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if not mod or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
