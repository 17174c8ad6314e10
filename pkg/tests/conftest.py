import pytest

N_CRITERIA = 10
_LINES: dict[int, str] = {}
_STARTED: set[int] = set()


@pytest.fixture
def criterion():
    """record(number, title, passed, detail) prints one PASS/FAIL line and asserts."""

    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        _LINES[number] = line
        print(line)
        assert passed, line

    return record


def pytest_runtest_setup(item):
    if item.module.__name__.endswith("test_acceptance"):
        number = getattr(item.function, "criterion_number", None)
        if number is not None:
            _STARTED.add(number)


def pytest_terminal_summary(terminalreporter):
    if not _STARTED:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        if n in _LINES:
            terminalreporter.write_line(_LINES[n])
        elif n in _STARTED:
            terminalreporter.write_line(f"criterion {n:>2} FAIL  raised before reporting")
