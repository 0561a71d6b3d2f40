"""Numerical checkers for the supporting L_p inequalities.

* ``check_ricard_xu`` -- square function bound for martingale differences,
  ``(sum ||d_i||_p^2)^{1/2} <= (p-1)^{-1/2} ||sum d_i||_p``.
* ``check_bcl`` -- two-point uniform convexity,
  ``||x||_p^2 + (p-1)||y||_p^2 <= (||x+y||_p^2 + ||x-y||_p^2) / 2``.
* ``check_lemma6`` -- averaged sections,
  ``int ||g_x - h_x||_1^p dP_I <= ||g - h||_p^p``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidP, InvalidParameter, SpaceMismatch
from .generate import normalized, random_dense, random_junta, rng_for
from .randvar import (
    MartingaleDiffs,
    RandomVariable,
    abs_power,
    absolute,
    check_split,
    expectation,
    lp_norm,
    martingale_differences,
    section_mean_map,
)
from .space import CoordSet, ProductSpace, make_finite_space, product_space, uniform_product

REL_TOL = 1e-9
# Dense instances are drawn only while the full table stays this small.
DENSE_LIMIT = 2**12


@dataclass(frozen=True)
class IneqReport:
    lhs: float
    rhs: float
    tol: float
    context: str

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + self.tol

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(slack=self.slack, holds=self.holds)
        return d


def _report(lhs: float, rhs: float, context: str) -> IneqReport:
    return IneqReport(lhs, rhs, REL_TOL * max(abs(lhs), abs(rhs)), context)


def _check_p(p: float) -> None:
    if not 1 < p <= 2:
        raise InvalidP(f"p must lie in (1, 2], got {p}")


def check_ricard_xu(diffs: MartingaleDiffs, p: float) -> IneqReport:
    _check_p(p)
    lhs = math.sqrt(math.fsum(lp_norm(d, p) ** 2 for d in diffs.diffs))
    rhs = lp_norm(diffs.total(), p) / math.sqrt(p - 1)
    return _report(lhs, rhs, f"ricard_xu p={p!r} levels={list(diffs.levels)}")


def check_bcl(x: RandomVariable, y: RandomVariable, p: float) -> IneqReport:
    _check_p(p)
    if x.space != y.space:
        raise SpaceMismatch("x and y live on different spaces")
    lhs = lp_norm(x, p) ** 2 + (p - 1) * lp_norm(y, p) ** 2
    rhs = (lp_norm(x + y, p) ** 2 + lp_norm(x - y, p) ** 2) / 2
    return _report(lhs, rhs, f"bcl p={p!r}")


def check_lemma6(g: RandomVariable, h: RandomVariable, I: CoordSet, p: float) -> IneqReport:
    if not p >= 1:
        raise InvalidParameter(f"p must be >= 1, got {p}")
    if g.space != h.space:
        raise SpaceMismatch("g and h live on different spaces")
    check_split(g.space, I)
    diff = absolute(g - h)
    # E(|g-h| | F_I) evaluated at x is exactly ||g_x - h_x||_{L_1}
    l1_sections = section_mean_map(diff, I)
    lhs = expectation(abs_power(l1_sections, p))
    rhs = lp_norm(diff, p) ** p
    return _report(lhs, rhs, f"lemma6 p={p!r} I={list(I)}")


# -- instance generators --------------------------------------------------------


def random_function(space: ProductSpace, rng: np.random.Generator, support: int = 8):
    """Dense when the table is small, otherwise (or at random) a junta."""
    total = math.prod(space.sizes)
    if total <= DENSE_LIMIT and rng.random() < 0.5:
        return random_dense(space, rng)
    return random_junta(space, rng, support=int(rng.integers(1, min(support, space.n) + 1)))


def random_martingale(
    space: ProductSpace, cut_count: int, seed: int, bound: float = 1.0, p: float = 2.0
) -> MartingaleDiffs:
    """Martingale differences of a random f with ||f||_p <= bound, at random cuts."""
    if not 1 <= cut_count <= space.n:
        raise InvalidParameter(f"cut_count must lie in 1..{space.n}, got {cut_count}")
    if bound <= 0:
        raise InvalidParameter("bound must be positive")
    rng = rng_for(seed)
    f = normalized(random_function(space, rng), p, bound)
    cuts = np.sort(rng.choice(np.arange(1, space.n + 1), size=cut_count, replace=False))
    return martingale_differences(f, cuts.tolist())


# -- suites ---------------------------------------------------------------------

P_GRID = (1.1, 1.25, 1.5, 1.75, 2.0)
LEMMA6_P_GRID = (1.0, 1.5, 2.0)
SUITES = ("rx", "bcl", "lemma6")


def random_space(rng: np.random.Generator, max_n: int = 6, max_atoms: int = 3) -> ProductSpace:
    """A product of 2..max_n factors with 2..max_atoms atoms and random positive weights."""
    n = int(rng.integers(2, max_n + 1))
    factors = []
    for _ in range(n):
        w = rng.uniform(0.1, 1.0, size=int(rng.integers(2, max_atoms + 1)))
        factors.append(make_finite_space(w / w.sum()))
    return product_space(factors)


def _trial_seed(seed: int, trial: int) -> int:
    return int(rng_for(seed, trial).integers(2**63))


def rx_suite(trials: int, seed: int, ps=P_GRID) -> list[IneqReport]:
    out = []
    for t in range(trials):
        rng = rng_for(seed, t)
        space = random_space(rng)
        cut_count = int(rng.integers(1, space.n + 1))
        diffs = random_martingale(space, cut_count, _trial_seed(seed, t))
        out.extend(check_ricard_xu(diffs, p) for p in ps)
    return out


def bcl_suite(trials: int, seed: int, ps=P_GRID) -> list[IneqReport]:
    out = []
    for t in range(trials):
        rng = rng_for(seed, t)
        space = random_space(rng)
        x = random_function(space, rng)
        y = random_function(space, rng) * float(rng.uniform(0.0, 2.0))
        out.extend(check_bcl(x, y, p) for p in ps)
    return out


def random_split(n: int, rng: np.random.Generator) -> CoordSet:
    """A random I with I and its complement both nonempty."""
    size = int(rng.integers(1, n))
    return CoordSet.of(rng.choice(np.arange(1, n + 1), size=size, replace=False))


def lemma6_suite(trials: int, seed: int, ps=LEMMA6_P_GRID, n: int = 8) -> list[IneqReport]:
    space = uniform_product(2, n)
    out = []
    for t in range(trials):
        rng = rng_for(seed, t)
        g = random_function(space, rng)
        h = random_function(space, rng)
        I = random_split(n, rng)
        out.extend(check_lemma6(g, h, I, p) for p in ps)
    return out


def run_suite(suite: str, trials: int, seed: int, ps=None) -> list[IneqReport]:
    if suite == "rx":
        return rx_suite(trials, seed, ps or P_GRID)
    if suite == "bcl":
        return bcl_suite(trials, seed, ps or P_GRID)
    if suite == "lemma6":
        return lemma6_suite(trials, seed, ps or LEMMA6_P_GRID)
    if suite == "all":
        return [r for s in SUITES for r in run_suite(s, trials, seed, ps)]
    raise InvalidParameter(f"unknown suite {suite!r}")
