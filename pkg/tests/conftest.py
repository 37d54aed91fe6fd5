import sys
from pathlib import Path

import pytest

# Make the oracle helpers importable from any test module.
sys.path.insert(0, str(Path(__file__).parent))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """One visible pass/fail line per acceptance criterion."""
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.module.__name__ == "test_acceptance":
        reporter = item.config.pluginmanager.get_plugin("terminalreporter")
        if reporter is not None:
            verdict = "PASS" if report.passed else "FAIL"
            reporter.write_line(f"[ACCEPTANCE] {item.name}: {verdict}")
