def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" and outcome != "error":
                continue
            crit = dict(getattr(rep, "user_properties", ())).get("criterion")
            if crit:
                lines.append((crit, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for crit, status in sorted(lines):
            terminalreporter.write_line(f"[{status}] {crit}")
