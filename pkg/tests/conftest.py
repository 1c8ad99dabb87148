from _criteria import RESULTS


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        status, title, elapsed, budget = RESULTS[number]
        terminalreporter.write_line(
            f"criterion {number}: {status}  {title}  ({elapsed:.2f} s, budget {budget:g} s)")
