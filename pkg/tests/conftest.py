import json
from pathlib import Path

import pytest

REFERENCE = Path(__file__).parent / "data" / "reference_values.json"


def as_complex(pair):
    return complex(float(pair[0]), float(pair[1]))


@pytest.fixture(scope="session")
def reference():
    """High-precision values produced by scripts/derive_reference_values.py."""
    return json.loads(REFERENCE.read_text())


# (criterion, passed, detail) rows filled by test_acceptance.py
ACCEPTANCE = []


def record(criterion, passed, detail):
    ACCEPTANCE.append((criterion, bool(passed), detail))
    return bool(passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for criterion, passed, detail in sorted(ACCEPTANCE, key=lambda row: row[0]):
        terminalreporter.write_line(f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
