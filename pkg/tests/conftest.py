import pytest

# (criterion number, label, passed, detail) appended by test_acceptance.py
ACCEPTANCE = []


@pytest.fixture
def record():
    def _record(number, label, passed, detail=""):
        ACCEPTANCE.append((number, label, bool(passed), detail))
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, label, passed, detail in sorted(ACCEPTANCE):
        tr.write_line(f"{'PASS' if passed else 'FAIL'}  [{number:2d}] {label:<58} {detail}")
    failed = sum(not p for _, _, p, _ in ACCEPTANCE)
    tr.write_line(f"{len(ACCEPTANCE) - failed} passed, {failed} failed")
