def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, collected from ``record_property``."""
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", None) != "call":
                continue
            for name, value in rep.user_properties:
                if name == "acceptance":
                    lines.append((value, "PASS" if rep.passed else "FAIL"))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for value, status in sorted(lines):
        terminalreporter.write_line(f"{status}  {value}")
