import pytest
from hypothesis import settings

from mimpdebug import driver, lang

settings.register_profile("ci", deadline=None)
settings.load_profile("ci")

P_SOURCE = """\
prog p(x, y)
    if x >= 0
        a = x
    else
        a = -x
    if y < 5
        b = a + 1
    else
        b = a + 2
    assert b <= a
"""


@pytest.fixture(scope="session")
def p_program():
    return lang.parse(P_SOURCE)


@pytest.fixture(scope="session")
def p_ssa(p_program):
    return driver.prepare_program(p_program, unroll_bound=8)


def comss_label_sets(report):
    """The report's CoMSSs as sets of base statement labels."""
    return {frozenset(s for s, _ in e.statements) for e in report.entries}
