CRITERIA = {}


def record(number, title, passed, detail):
    CRITERIA[number] = (title, bool(passed), detail)
    print(f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        title, passed, detail = CRITERIA[number]
        terminalreporter.write_line(f"{number}. {'PASS' if passed else 'FAIL'}  {title} -- {detail}")
