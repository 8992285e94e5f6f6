import contextlib

import pytest

_RESULTS = []


class _Criterion:
    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.detail = ""


@pytest.fixture
def criterion():
    """Context manager that logs a numbered acceptance criterion as PASS or FAIL."""

    @contextlib.contextmanager
    def run(number, title):
        c = _Criterion(number, title)
        try:
            yield c
        except BaseException as exc:
            _RESULTS.append((number, "FAIL", title, c.detail or f"{type(exc).__name__}: {exc}".splitlines()[0]))
            raise
        _RESULTS.append((number, "PASS", title, c.detail))

    return run


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, title, detail in sorted(_RESULTS):
        line = f"AC-{number:02d} {status}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
    passed = sum(1 for r in _RESULTS if r[1] == "PASS")
    terminalreporter.write_line(f"{passed}/{len(_RESULTS)} criteria passed")
