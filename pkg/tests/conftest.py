import numpy as np
import pytest
from hypothesis import strategies as st

from prodconc.randvar import Dense, Junta
from prodconc.space import CoordSet, make_finite_space, product_space, uniform_product


@st.composite
def spaces(draw, max_n=5, max_atoms=3):
    n = draw(st.integers(1, max_n))
    factors = []
    for _ in range(n):
        k = draw(st.integers(1, max_atoms))
        raw = draw(st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k))
        total = sum(raw)
        factors.append(make_finite_space([r / total for r in raw]))
    return product_space(factors)


@st.composite
def dense_rvs(draw, min_n=1, max_n=5, max_atoms=3):
    space = draw(spaces(max_n=max_n, max_atoms=max_atoms).filter(lambda s: s.n >= min_n))
    seed = draw(st.integers(0, 2**32 - 1))
    table = np.random.default_rng(seed).uniform(-1, 1, size=space.sizes)
    return Dense(space, table)


@st.composite
def splits(draw, n):
    """A nonempty I with nonempty complement, for n >= 2."""
    members = draw(st.sets(st.integers(1, n), min_size=1, max_size=n - 1))
    return CoordSet.of(members)


@pytest.fixture
def bits3():
    return uniform_product(2, 3)


@pytest.fixture
def xor12(bits3):
    return Junta.from_values(bits3, [1, 2], [0, 1, 1, 0])


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when == "call" and "test_acceptance.py::" in rep.nodeid:
                name = rep.nodeid.split("::")[-1]
                lines.append((name, outcome))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, outcome in sorted(lines):
            terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
