"""Shared pytest hooks: the acceptance suite reports one line per criterion."""

from __future__ import annotations

ACCEPTANCE: dict[str, list[tuple[bool, str]]] = {}


def record(criterion: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE.setdefault(criterion, []).append((bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        entries = ACCEPTANCE[criterion]
        status = "PASS" if all(ok for ok, _ in entries) else "FAIL"
        terminalreporter.write_line(f"criterion {criterion}: {status}")
        for ok, detail in entries:
            if detail:
                terminalreporter.write_line(f"    [{'ok' if ok else 'x '}] {detail}")
