from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.dirname(__file__))


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, in criterion order."""
    lines = []
    for status in ("passed", "failed"):
        for rep in terminalreporter.stats.get(status, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" not in props:
                continue
            verdict = "PASS" if rep.passed else "FAIL"
            lines.append((props["criterion"], f"criterion {props['criterion']:>2}: {verdict}  {props.get('title', '')}"
                          f"  [{props.get('detail', '')}]"))
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
