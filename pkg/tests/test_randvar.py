import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import dense_rvs, splits
from prodconc.errors import (
    EmptyCoordSet,
    IndexOutOfRange,
    NonIncreasingCuts,
    TooLargeToEnumerate,
)
from prodconc.generate import random_junta, rng_for
from prodconc.randvar import (
    Dense,
    Junta,
    Rank1,
    conditional_expectation,
    constant,
    densify,
    evaluate,
    expectation,
    indicator_product,
    lp_norm,
    martingale_differences,
    section,
    section_mean,
    section_mean_map,
    section_means_at,
)
from prodconc.space import CoordSet, Outcome, enumerate_outcomes, uniform_product


def point(*atoms):
    return Outcome(CoordSet.full(len(atoms)), atoms)


def at(coords, atoms):
    return Outcome(CoordSet(tuple(coords)), tuple(atoms))


class TestEvaluate:
    def test_constant(self, bits3):
        assert evaluate(Dense(bits3, np.full((2, 2, 2), 3.5)), point(1, 0, 1)) == 3.5

    def test_rank1_all_ones(self, bits3):
        assert evaluate(Rank1(bits3, ([1, 1], [1, 1], [1, 1])), point(0, 1, 0)) == 1

    def test_xor(self, xor12):
        assert evaluate(xor12, point(1, 0, 0)) == 1
        assert evaluate(xor12, point(1, 0, 1)) == 1
        assert evaluate(xor12, point(1, 1, 0)) == 0

    def test_needs_full_outcome(self, xor12):
        with pytest.raises(IndexOutOfRange):
            evaluate(xor12, at([1, 2], [0, 0]))


class TestExpectation:
    def test_constant(self, bits3):
        assert expectation(constant(bits3, -2.0)) == -2.0

    def test_xor(self, xor12):
        # oracle: 4 equally likely outcomes, two of which have value 1
        assert expectation(xor12) == 0.5

    def test_rank1_product_of_bits(self, bits3):
        assert expectation(Rank1(bits3, ([0, 1],) * 3)) == 0.125


class TestLpNorm:
    def test_constant_one(self, bits3):
        for p in (1, 1.3, 2, 5):
            assert lp_norm(constant(bits3, 1.0), p) == pytest.approx(1.0, abs=1e-15)

    def test_signs(self, bits3):
        f = Dense(bits3, np.where(np.arange(8).reshape(2, 2, 2) % 3 == 0, 1.0, -1.0))
        assert lp_norm(f, 1.5) == pytest.approx(1.0, abs=1e-15)

    def test_indicator_eighth(self, bits3):
        f = indicator_product(bits3, [[1], [1], [1]])
        assert lp_norm(f, 2) == pytest.approx(0.3535533905932738, rel=1e-15)
        assert lp_norm(densify(f), 2) == pytest.approx(0.3535533905932738, rel=1e-15)


class TestSection:
    def test_constant(self, bits3):
        s = section(constant(bits3, 4.0), CoordSet((2,)), at([2], [1]))
        assert s.space.n == 2 and expectation(s) == 4.0

    def test_product_event_inside(self):
        n = 5
        space = uniform_product(2, n)
        A = indicator_product(space, [[0]] * n)
        I = CoordSet((2, 4))
        s = section(A, I, at(I, [0, 0]))
        assert expectation(s) == 2.0 ** (-n + len(I))

    def test_product_event_outside(self):
        space = uniform_product(2, 5)
        A = indicator_product(space, [[0]] * 5)
        s = section(A, CoordSet((2, 4)), at([2, 4], [0, 1]))
        assert lp_norm(s, 1) == 0

    def test_junta_section_relabels(self):
        space = uniform_product(2, 4)
        f = Junta.from_values(space, [2, 4], [1, 2, 3, 4])
        s = section(f, CoordSet((1, 2)), at([1, 2], [0, 1]))
        assert isinstance(s, Junta) and s.coords == CoordSet((2,))
        assert list(s.table) == [3, 4]

    def test_requires_nonempty_sides(self, xor12):
        with pytest.raises(EmptyCoordSet):
            section(xor12, CoordSet(()), at([], []))
        with pytest.raises(EmptyCoordSet):
            section(xor12, CoordSet((1, 2, 3)), at([1, 2, 3], [0, 0, 0]))


class TestSectionMean:
    def test_constant(self, bits3):
        assert section_mean(constant(bits3, 0.25), CoordSet((1,)), at([1], [1])) == 0.25

    def test_xor_either_atom(self, xor12):
        for a in (0, 1):
            assert section_mean(xor12, CoordSet((1,)), at([1], [a])) == 0.5

    def test_product_event(self):
        space = uniform_product(2, 6)
        A = indicator_product(space, [[1]] * 6)
        assert section_mean(A, CoordSet((1, 2, 3)), at([1, 2, 3], [1, 1, 1])) == 2.0**-3

    def test_batch_matches_pointwise(self):
        space = uniform_product(3, 5)
        f = random_junta(space, rng_for(5), 3)
        I = CoordSet((1, 2, 4))
        xs = list(enumerate_outcomes(space, I))
        atoms = np.array([x.atoms for x, _ in xs])
        batch = section_means_at(f, I, atoms)
        assert batch == pytest.approx([section_mean(f, I, x) for x, _ in xs], abs=1e-15)


class TestConditionalExpectation:
    def test_top_level_is_identity(self, xor12):
        top = conditional_expectation(xor12, 3)
        assert top.level == 3 and top.rv is xor12

    def test_level_zero_is_mean(self, xor12):
        assert float(conditional_expectation(xor12, 0).rv.table) == 0.5

    def test_xor_level_one(self, xor12):
        ce = conditional_expectation(xor12, 1)
        assert all(ce.evaluate(point(*a)) == 0.5 for a in itertools.product((0, 1), repeat=3))

    def test_rank1_replaces_tail(self):
        space = uniform_product(2, 3)
        f = Rank1(space, ([1, 2], [0, 4], [2, 6]))
        ce = conditional_expectation(f, 1).rv
        assert isinstance(ce, Rank1)
        assert evaluate(ce, point(1, 0, 0)) == 2 * 2 * 4

    def test_level_range(self, xor12):
        with pytest.raises(IndexOutOfRange):
            conditional_expectation(xor12, 4)


class TestMartingaleDifferences:
    def test_single_top_cut(self, xor12):
        md = martingale_differences(xor12, [3])
        assert len(md) == 1 and md.diffs[0] is xor12

    def test_constant(self, bits3):
        md = martingale_differences(constant(bits3, 2.0), [1, 2, 3])
        assert expectation(md.diffs[0]) == 2.0
        assert all(lp_norm(d, 1) == 0 for d in md.diffs[1:])

    def test_xor(self, xor12):
        d1, d2 = martingale_differences(xor12, [1, 2]).diffs
        for a in itertools.product((0, 1), repeat=3):
            x = point(*a)
            assert evaluate(d1, x) == 0.5
            assert evaluate(d2, x) == evaluate(xor12, x) - 0.5

    @pytest.mark.parametrize("cuts", [[2, 1], [1, 1], []])
    def test_cuts_must_increase(self, xor12, cuts):
        with pytest.raises(NonIncreasingCuts):
            martingale_differences(xor12, cuts)


def test_junta_cap(monkeypatch):
    space = uniform_product(2, 20)
    with pytest.raises(TooLargeToEnumerate):
        Junta.from_values(space, list(range(1, 18)), [0.0] * 2**17)
    monkeypatch.setenv("PRODCONC_JUNTA_CAP", "17")
    assert Junta.from_values(space, list(range(1, 18)), [0.0] * 2**17).coords.members[-1] == 17


def test_junta_coords_given_out_of_order():
    space = uniform_product(2, 3)
    f = Junta.from_values(space, [3, 1], [10, 20, 30, 40])
    # listed order is (3, 1): coordinate 3 = a, coordinate 1 = b reads entry 2a + b
    assert evaluate(f, point(0, 0, 1)) == 30
    assert evaluate(f, point(1, 1, 0)) == 20
    assert evaluate(f, point(1, 0, 1)) == 40


def test_large_junta_stays_cheap():
    space = uniform_product(2, 500)
    f = random_junta(space, rng_for(1), 8)
    assert abs(expectation(conditional_expectation(f, 250).rv) - expectation(f)) <= 1e-12


# -- properties ----------------------------------------------------------------


@settings(max_examples=80, deadline=None)
@given(dense_rvs(min_n=2), st.data())
def test_oracle_agreement(f, data):
    w = oracles.weights_of(f.space)
    fn = oracles.table_fn(f.table)
    assert expectation(f) == pytest.approx(oracles.expectation(w, fn), abs=1e-12)
    p = data.draw(st.sampled_from([1.0, 1.5, 2.0, 3.0]))
    assert lp_norm(f, p) == pytest.approx(oracles.lp_norm(w, fn, p), abs=1e-12)
    I = data.draw(splits(f.space.n))
    for x, _ in enumerate_outcomes(f.space, I):
        assert section_mean(f, I, x) == pytest.approx(
            oracles.section_mean(w, fn, tuple(I), x.atoms), abs=1e-12
        )


@settings(max_examples=80, deadline=None)
@given(dense_rvs(min_n=2), st.data())
def test_fubini(f, data):
    I = data.draw(splits(f.space.n))
    total = math.fsum(w * section_mean(f, I, x) for x, w in enumerate_outcomes(f.space, I))
    assert abs(total - expectation(f)) <= 1e-10


@settings(max_examples=80, deadline=None)
@given(dense_rvs(), st.data())
def test_tower_and_contraction(f, data):
    m = data.draw(st.integers(0, f.space.n))
    p = data.draw(st.floats(1.0, 4.0))
    ce = conditional_expectation(f, m).rv
    assert abs(expectation(ce) - expectation(f)) <= 1e-10
    assert lp_norm(ce, p) <= lp_norm(f, p) + 1e-10


@settings(max_examples=60, deadline=None)
@given(dense_rvs(), st.data())
def test_measurability(f, data):
    m = data.draw(st.integers(0, f.space.n))
    ce = conditional_expectation(f, m)
    head = [range(s) for s in f.space.sizes[:m]]
    tails = list(itertools.product(*(range(s) for s in f.space.sizes[m:])))
    for h in itertools.product(*head):
        vals = {ce.evaluate(point(*(h + t))) for t in tails}
        assert len(vals) == 1


@settings(max_examples=60, deadline=None)
@given(dense_rvs(), st.data())
def test_partial_sums_and_orthogonality(f, data):
    cuts = sorted(data.draw(st.sets(st.integers(1, f.space.n), min_size=1)))
    md = martingale_differences(f, cuts)
    for r, m in enumerate(cuts, start=1):
        target = conditional_expectation(f, m).rv
        diff = densify(md.partial_sum(r)).table - densify(target).table
        assert np.max(np.abs(diff)) <= 1e-10
    square = math.sqrt(math.fsum(lp_norm(d, 2) ** 2 for d in md.diffs))
    assert square == pytest.approx(lp_norm(md.total(), 2), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**31), st.data())
def test_representation_consistency(n, seed, data):
    space = uniform_product(2, n)
    rng = rng_for(seed)
    if data.draw(st.booleans()):
        f = random_junta(space, rng, int(rng.integers(1, n + 1)))
    else:
        f = Rank1(space, tuple(rng.uniform(-1, 1, 2) for _ in range(n)))
    d = densify(f)
    p = data.draw(st.sampled_from([1.0, 1.25, 2.0]))
    assert expectation(f) == pytest.approx(expectation(d), abs=1e-10)
    assert lp_norm(f, p) == pytest.approx(lp_norm(d, p), abs=1e-10)
    m = data.draw(st.integers(0, n))
    a = densify(conditional_expectation(f, m).rv).table
    b = densify(conditional_expectation(d, m).rv).table
    assert np.max(np.abs(a - b)) <= 1e-10
    I = data.draw(splits(n))
    for x, _ in enumerate_outcomes(space, I):
        assert section_mean(f, I, x) == pytest.approx(section_mean(d, I, x), abs=1e-10)


def test_section_mean_map_is_conditional_expectation_given_I():
    # E(f | coordinates in I) at a full outcome equals the section mean at its I-part
    space = uniform_product(3, 4)
    f = Dense(space, rng_for(11).uniform(-1, 1, space.sizes))
    I = CoordSet((2, 3))
    m = section_mean_map(f, I)
    for full, _ in enumerate_outcomes(space, space.all_coords()):
        x = at(I, [full[c] for c in I])
        assert evaluate(m, full) == pytest.approx(section_mean(f, I, x), abs=1e-14)
