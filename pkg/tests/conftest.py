import pytest

# criterion number -> (passed, message); filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    def record(number, passed, message):
        ACCEPTANCE[number] = (bool(passed), message)
        print(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {message}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, message = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {message}")
