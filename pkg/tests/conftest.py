import pytest

ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Context manager recording one PASS/FAIL line per acceptance criterion."""

    class _Criterion:
        def __init__(self, number, title):
            self.line = f"criterion {number:2d}: {title}"

        def __enter__(self):
            return self

        def __exit__(self, kind, exc, tb):
            status = "PASS" if kind is None else "FAIL"
            text = f"[{status}] {self.line}"
            print(text)
            ACCEPTANCE.append(text)
            return False

    return _Criterion
