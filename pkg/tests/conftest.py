import pytest

_CRITERIA = []


class CriterionLog:
    """Collects one verdict line per acceptance criterion."""

    def __call__(self, label, passed, detail):
        _CRITERIA.append((label, bool(passed), detail))
        return passed


@pytest.fixture
def criterion():
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in sorted(_CRITERIA, key=lambda item: item[0]):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")
