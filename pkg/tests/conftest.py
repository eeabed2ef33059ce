import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    """Record one acceptance line: ``acceptance("7a", ok, "detail")``."""

    def record(label: str, ok: bool, detail: str = ""):
        _ACCEPTANCE[label] = (bool(ok), detail)

    return record


def _label_key(label: str):
    digits = "".join(ch for ch in label if ch.isdigit())
    return int(digits or 0), label


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=_label_key):
        ok, detail = _ACCEPTANCE[label]
        tr.write_line(f"criterion {label:<4} {'PASS' if ok else 'FAIL'}  {detail}")
