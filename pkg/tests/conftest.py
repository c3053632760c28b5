import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, line = results[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n}. {line}")
