from __future__ import annotations

import pytest

import egosim.trace as trace_mod


@pytest.fixture(params=trace_mod.available_backends())
def kernel_backend(request) -> str:
    """Run the receiving test once per available trace-kernel backend."""
    previous = trace_mod.active_backend()
    trace_mod.set_backend(request.param)
    yield request.param
    trace_mod.set_backend(previous)


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid and getattr(report, "when", "call") == "call":
                name = nodeid.split("::")[-1]
                status = "PASS" if outcome == "passed" else "FAIL"
                lines.append((name, status))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}")
