import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One verdict line per acceptance criterion at the end of the run."""
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for name in mod.CRITERIA:
        res = mod.RESULTS.get(name)
        if res is None:
            terminalreporter.write_line(
                f"[ none ] {name}: no verdict (nightly or deselected)")
        else:
            ok, detail = res
            word = "PASS" if ok else "FAIL"
            terminalreporter.write_line(f"[ {word} ] {name}: {detail}")
