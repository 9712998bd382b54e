import pytest
from hypothesis import settings

# single-CPU runners with cold quadrature caches overrun the default deadline
settings.register_profile("default", deadline=None)
settings.load_profile("default")

ACCEPTANCE = {}


@pytest.fixture
def record():
    """Store one acceptance line: record(key, passed, detail)."""

    def _record(key, passed, detail):
        ACCEPTANCE[key] = (passed, detail)
        status = "INFO" if passed is None else ("PASS" if passed else "FAIL")
        print(f"ACCEPTANCE {key}: {status}  {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split("-")[0][0]), k)):
        passed, detail = ACCEPTANCE[key]
        status = "PASS" if passed is True else ("INFO" if passed is None else "FAIL")
        terminalreporter.write_line(f"{key:>4}  {status}  {detail}")
