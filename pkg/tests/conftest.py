import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from ioncasimir import QuadratureSpec, default_stack  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def stack():
    return default_stack()


@pytest.fixture(scope="session")
def spec():
    return QuadratureSpec()


#: Acceptance results, filled by tests/test_acceptance.py: (criterion, ok, summary).
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, summary in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {crit}: {summary}")
