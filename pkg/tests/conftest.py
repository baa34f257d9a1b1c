import pytest

_ACCEPTANCE: dict = {}


@pytest.fixture
def criterion():
    """Record ``(label, passed, detail)`` for the acceptance summary."""

    def record(label: str, passed: bool, detail: str = ""):
        _ACCEPTANCE[label] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0][1:])):
        passed, detail = _ACCEPTANCE[label]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")
