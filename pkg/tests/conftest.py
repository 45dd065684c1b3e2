"""Shared pytest wiring.

After the run, print one line per acceptance criterion (collected by
tests/test_acceptance.py) so the final report reads as a checklist even
when the details are buried in the verbose log.
"""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria")
    for name, status, detail in results:
        line = f"{status:4s} {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
