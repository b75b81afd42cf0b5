import pytest

_ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def acceptance():
    """Record one sub-result of a numbered acceptance criterion; returns ``ok``."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> bool:
        _ACCEPTANCE.setdefault(number, []).append((title, bool(ok), detail))
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        rows = _ACCEPTANCE[number]
        ok = all(r[1] for r in rows)
        title = rows[0][0]
        failed = [r[2] for r in rows if not r[1]]
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}"
        if failed:
            line += "  [failed: " + "; ".join(failed) + "]"
        terminalreporter.write_line(line)
