import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import dense_rvs, splits
from prodconc.errors import InvalidP, InvalidParameter, SpaceMismatch
from prodconc.generate import random_dense, rng_for
from prodconc.inequalities import (
    IneqReport,
    P_GRID,
    check_bcl,
    check_lemma6,
    check_ricard_xu,
    random_martingale,
    run_suite,
)
from prodconc.randvar import (
    Dense,
    conditional_expectation,
    constant,
    densify,
    lp_norm,
    martingale_differences,
)
from prodconc.space import CoordSet, uniform_product


def test_report_semantics():
    r = IneqReport(1.0, 1.0 - 5e-10, 1e-9, "edge")
    assert r.holds and r.slack == pytest.approx(-5e-10)
    assert not IneqReport(1.0, 0.5, 1e-9, "bad").holds


class TestRicardXu:
    def test_single_difference(self, xor12):
        md = martingale_differences(xor12, [3])
        r = check_ricard_xu(md, 1.5)
        assert r.lhs == pytest.approx(lp_norm(xor12, 1.5))
        assert r.rhs == pytest.approx(lp_norm(xor12, 1.5) / math.sqrt(0.5))
        assert r.holds

    def test_p2_is_orthogonality(self):
        space = uniform_product(3, 4)
        f = random_dense(space, rng_for(3))
        r = check_ricard_xu(martingale_differences(f, [1, 2, 3, 4]), 2.0)
        assert r.lhs == pytest.approx(r.rhs, rel=1e-9)

    @pytest.mark.parametrize("p", [1.0, 2.5])
    def test_p_range(self, xor12, p):
        with pytest.raises(InvalidP):
            check_ricard_xu(martingale_differences(xor12, [3]), p)

    def test_random_martingales(self):
        space = uniform_product(2, 6)
        for seed in range(100):
            md = random_martingale(space, 3, seed)
            assert check_ricard_xu(md, 1.5).holds


class TestBCL:
    def test_y_zero_equality(self, xor12, bits3):
        r = check_bcl(xor12, constant(bits3, 0.0), 1.3)
        assert r.lhs == pytest.approx(lp_norm(xor12, 1.3) ** 2, rel=1e-15)
        assert r.lhs == pytest.approx(r.rhs, rel=1e-9)

    def test_parallelogram(self):
        space = uniform_product(2, 3)
        rng = rng_for(8)
        x, y = random_dense(space, rng), random_dense(space, rng)
        r = check_bcl(x, y, 2.0)
        # oracle: expand both squared norms by enumeration
        w = oracles.weights_of(space)
        fx, fy = oracles.table_fn(x.table), oracles.table_fn(y.table)
        nx = oracles.lp_norm(w, fx, 2) ** 2
        ny = oracles.lp_norm(w, fy, 2) ** 2
        assert r.lhs == pytest.approx(nx + ny, rel=1e-12)
        assert r.rhs == pytest.approx(nx + ny, rel=1e-12)

    def test_random_pair_low_p(self):
        space = uniform_product(2, 3)
        rng = rng_for(9)
        assert check_bcl(random_dense(space, rng), random_dense(space, rng), 1.2).holds

    def test_space_mismatch(self, xor12):
        with pytest.raises(SpaceMismatch):
            check_bcl(xor12, constant(uniform_product(2, 4), 1.0), 1.5)


class TestLemma6:
    def test_equal_functions(self, xor12):
        r = check_lemma6(xor12, xor12, CoordSet((1,)), 1.5)
        assert r.lhs == r.rhs == 0 and r.holds

    def test_constant_difference(self, xor12):
        r = check_lemma6(xor12 + 0.75, xor12, CoordSet((2,)), 1.7)
        assert r.lhs == pytest.approx(0.75**1.7, rel=1e-12)
        assert r.rhs == pytest.approx(0.75**1.7, rel=1e-12)

    def test_against_enumeration(self):
        space = uniform_product(2, 8)
        rng = rng_for(12)
        g, h = random_dense(space, rng), random_dense(space, rng)
        I = CoordSet((2, 5, 7))
        p = 1.7
        r = check_lemma6(g, h, I, p)
        w = oracles.weights_of(space)
        d = oracles.table_fn(np.abs(g.table - h.table))
        lhs = math.fsum(
            wx * oracles.section_mean(w, d, tuple(I), x) ** p
            for x, wx in oracles.outcomes(w, tuple(I))
        )
        assert r.lhs == pytest.approx(lhs, rel=1e-12)
        assert r.rhs == pytest.approx(oracles.lp_norm(w, d, p) ** p, rel=1e-12)
        assert r.holds

    def test_p_below_one(self, xor12):
        with pytest.raises(InvalidParameter):
            check_lemma6(xor12, xor12, CoordSet((1,)), 0.5)


class TestGenerator:
    def test_deterministic(self):
        space = uniform_product(2, 5)
        a, b = random_martingale(space, 3, 77), random_martingale(space, 3, 77)
        assert a.levels == b.levels
        for x, y in zip(a.diffs, b.diffs):
            assert np.array_equal(densify(x).table, densify(y).table)

    def test_bound(self):
        space = uniform_product(3, 4)
        for seed in range(30):
            assert lp_norm(random_martingale(space, 2, seed, p=1.5).total(), 1.5) <= 1 + 1e-10

    def test_single_cut(self):
        space = uniform_product(2, 5)
        md = random_martingale(space, 1, 5)
        (d,) = md.diffs
        f_level = md.levels[0]
        assert d.space == space and 1 <= f_level <= 5

    def test_cut_count_range(self):
        with pytest.raises(InvalidParameter):
            random_martingale(uniform_product(2, 3), 4, 0)


@pytest.mark.parametrize("suite", ["rx", "bcl", "lemma6"])
def test_suites_hold(suite):
    reports = run_suite(suite, 60, 3)
    assert reports and all(r.holds for r in reports)


@settings(max_examples=60, deadline=None)
@given(dense_rvs(), st.sampled_from(P_GRID))
def test_monotone_martingale_norms(f, p):
    norms = [lp_norm(conditional_expectation(f, m).rv, p) for m in range(f.space.n + 1)]
    assert all(b >= a - 1e-10 for a, b in zip(norms, norms[1:]))


@settings(max_examples=60, deadline=None)
@given(dense_rvs(min_n=2), st.data())
def test_lemma6_property(g, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    h = Dense(g.space, rng.uniform(-1, 1, g.space.sizes))
    I = data.draw(splits(g.space.n))
    p = data.draw(st.floats(1.0, 3.0))
    assert check_lemma6(g, h, I, p).holds
    assert check_lemma6(g, g - 0.3, I, p).slack == pytest.approx(0, abs=1e-9)
