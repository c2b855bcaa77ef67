from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from homcantor.ifs import make_ifs, middle_alpha, refine
from homcantor.pipeline import RunConfig, run_pipeline

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

THIRD = Fraction(1, 3)


@pytest.fixture
def cantor():
    return middle_alpha(THIRD)


@pytest.fixture(scope="session")
def quick_run():
    """Middle-9/20 set, refined twice, cross mode: certifies on an early draw."""
    res = run_pipeline(RunConfig(middle_alpha(Fraction(9, 20)), refine=2, seed=0, depth=4))
    assert res.code == 0, res.report
    return res


def alphas():
    return st.fractions(min_value=Fraction(1, 20), max_value=Fraction(9, 20),
                        max_denominator=40)


@st.composite
def cantor_sets(draw, max_letters=4):
    """Random valid homogeneous sets on ``[0, 1]`` with gaps drawn at random."""
    n = draw(st.integers(2, max_letters))
    den = draw(st.integers(n + 1, 30))
    ratio = Fraction(draw(st.integers(1, max(1, (den - 1) // n))), den)
    if n * ratio >= 1:
        ratio = Fraction(1, n + 1)
    free = 1 - n * ratio
    cuts = sorted(draw(st.lists(st.fractions(0, 1, max_denominator=12),
                                min_size=n - 2, max_size=n - 2)))
    weights = [Fraction(1, 100) + b - a for a, b in zip([0] + cuts, cuts + [1])]
    total = sum(weights)
    gaps = [free * w / total for w in weights]
    offsets, x = [], Fraction(0)
    for i in range(n):
        offsets.append(x)
        x += ratio + (gaps[i] if i < n - 1 else 0)
    return make_ifs(offsets, ratio)


def refined(a, n):
    return refine(middle_alpha(a), n)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
