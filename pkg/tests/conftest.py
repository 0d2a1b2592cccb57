def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of a run."""
    rows = []
    for status, word in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(status, []):
            if "test_acceptance" not in rep.nodeid:
                continue
            if getattr(rep, "when", "call") != "call":
                continue
            rows.append((rep.nodeid.split("::")[-1], word))
    for rep in terminalreporter.stats.get("skipped", []):
        if "test_acceptance" in rep.nodeid:
            rows.append((rep.nodeid.split("::")[-1], "SKIP"))
    if rows:
        terminalreporter.section("acceptance criteria")
        for name, word in sorted(set(rows)):
            terminalreporter.write_line(f"{word}  {name}")
