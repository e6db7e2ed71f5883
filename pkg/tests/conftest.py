from fractions import Fraction

import pytest
from hypothesis import settings

from schedcon.model import Fleet

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# A(mu=10, gamma=2, v=5), B(8, 3, 4), C(6, 1, 2); ids 0, 1, 2
F3_RATINGS = [(10, 2, 5), (8, 3, 4), (6, 1, 2)]
A, B, C = 0, 1, 2


@pytest.fixture
def f3():
    return Fleet.from_ratings(F3_RATINGS)


def frac(s):
    return Fraction(s)


# criterion number -> list of (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        verdict = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        details = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"{verdict} criterion {n}: {details}")
