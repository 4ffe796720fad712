"""Print one PASS/FAIL line per acceptance criterion after a pytest run."""

from __future__ import annotations


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" or "test_acceptance" not in rep.nodeid:
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                rows.append((props["criterion"], outcome == "passed", props.get("detail", "")))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for k, ok, detail in sorted(rows):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {k:2d}: {detail}")
