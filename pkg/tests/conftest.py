"""Collects acceptance-criterion verdicts and prints them at the end of the run."""

VERDICTS = {}


def record(criterion: str, ok: bool, detail: str = "") -> None:
    VERDICTS[criterion] = (ok, detail)
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f": {detail}" if detail else "")
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(VERDICTS):
        ok, detail = VERDICTS[name]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))
