"""Locating concentration intervals on product spaces and checking them exactly.

The central routine is the energy-increment block scan.  Fix block points
``i_k = (k-1) * floor((n-2)/ell) + 1`` for ``k = 1..ell+1`` with
``ell = floor(theta^-2 (p-1)^-1) + 1``.  If every consecutive pair of
conditional expectations ``E(f|S_{i_k})`` were more than ``theta`` apart in
L_p, the square-function bound for martingale differences would force
``||f||_p > 1``.  So for a unit-ball ``f`` the scan always finds a close pair
``(i, j)``, and the coordinates ``J = {i+1..j}`` form a block along which
the section means of ``f`` concentrate around ``E(f)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import (
    InternalContradiction,
    InvalidParameter,
    InvalidP,
    NotAnIndicator,
    PreconditionViolated,
    SpaceMismatch,
    TooLargeToEnumerate,
    UniversalityFailed,
)
from .generate import rng_for
from .montecarlo import Estimate, MonteCarloConfig, estimate_concentration
from .randvar import (
    Rank1,
    RandomVariable,
    as_table,
    broadcast_table,
    check_split,
    conditional_expectation,
    expectation,
    indicator_product,
    lp_norm,
    scale,
    section_mean_map,
)
from .space import (
    CoordSet,
    FiniteSpace,
    IndexInterval,
    ProductSpace,
    check_enumerable,
    uniform_product,
)

NORM_SLACK = 1e-10
# Relative distance under which a computed constant is taken to be the nearby integer.
SNAP_TOL = 1e-9


def _snap(x: float) -> float:
    r = round(x)
    return float(r) if abs(x - r) <= SNAP_TOL * max(1.0, abs(x)) else x


def snapped_floor(x: float) -> int:
    return math.floor(_snap(x))


def snapped_ceil(x: float) -> int:
    return math.ceil(_snap(x))


def block_count(theta: float, p: float) -> int:
    """ell = floor(theta^-2 (p-1)^-1) + 1."""
    return snapped_floor(1.0 / (theta**2 * (p - 1))) + 1


def block_points(n: int, ell: int) -> list[int]:
    step = (n - 2) // ell
    return [(k - 1) * step + 1 for k in range(1, ell + 2)]


@dataclass(frozen=True)
class SearchParams:
    """Constants of one search.  ``mode`` is "theorem1" or "theorem9"."""

    epsilon: float
    p: float
    theta: float
    ell: int
    c: float
    mode: str = "theorem1"

    @classmethod
    def theorem1(cls, epsilon: float, p: float) -> "SearchParams":
        _check_eps_p(epsilon, p)
        theta = epsilon ** ((p + 1) / p)
        c = 0.25 * epsilon ** (2 * (p + 1) / p) * (p - 1)
        return cls(epsilon, p, theta, block_count(theta, p), c, "theorem1")

    @classmethod
    def theorem9(cls, epsilon: float, p: float) -> "SearchParams":
        _check_eps_p(epsilon, p)
        theta = epsilon ** ((2 * p + 1) / p)
        c = 0.25 * epsilon ** (2 * (2 * p + 1) / p) * (p - 1)
        return cls(epsilon, p, theta, block_count(theta, p), c, "theorem9")

    @property
    def min_n(self) -> int:
        return snapped_ceil(2.0 / self.c)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "p": self.p,
            "theta": self.theta,
            "ell": self.ell,
            "c": self.c,
            "min_n": self.min_n,
            "mode": self.mode,
        }


def _check_eps_p(epsilon: float, p: float) -> None:
    if not 0 < epsilon <= 1:
        raise InvalidParameter(f"epsilon must lie in (0, 1], got {epsilon}")
    if not 1 < p <= 2:
        raise InvalidP(f"p must lie in (1, 2], got {p}")


class SearchResult(NamedTuple):
    i: int
    j: int
    gap: float


class Located(NamedTuple):
    interval: IndexInterval
    params: SearchParams
    gap: float


# -- the block scan -------------------------------------------------------------


def _block_scan(n: int, theta: float, p: float, gap_at: Callable[[int, int], float]) -> SearchResult:
    if not 0 < theta <= 1:
        raise InvalidParameter(f"theta must lie in (0, 1], got {theta}")
    if not 1 < p <= 2:
        raise InvalidP(f"p must lie in (1, 2], got {p}")
    need = _snap(8.0 / (theta**2 * (p - 1)))
    if n < need:
        raise PreconditionViolated(
            f"the block scan needs n >= 8 theta^-2 (p-1)^-1 = {need:.6g}, got n = {n}"
        )
    ell = block_count(theta, p)
    points = block_points(n, ell)
    for a, b in zip(points, points[1:]):
        gap = gap_at(a, b)
        if gap <= theta:
            if (b - a) < theta**2 * (p - 1) / 4 * n:
                raise InternalContradiction(f"block width {b - a} below the guaranteed width")
            return SearchResult(a, b, gap)
    raise InternalContradiction(
        f"no block pair within theta = {theta!r}; the unit-ball hypothesis must have failed numerically"
    )


class _LevelCache:
    def __init__(self, f: RandomVariable):
        self.f = f
        self._levels: dict[int, RandomVariable] = {}

    def __call__(self, m: int) -> RandomVariable:
        if m not in self._levels:
            self._levels[m] = conditional_expectation(self.f, m).rv
        return self._levels[m]


def _rank1_gap(f: Rank1, i: int, j: int, p: float) -> float:
    """||E(f|S_j) - E(f|S_i)||_p for a product, without expanding coordinates outside (i, j].

    The difference factors as (prod_{c<=i} f_c) (prod_{i<c<=j} f_c - prod_{i<c<=j} mu_c)
    (prod_{c>j} mu_c); only the middle factor needs work, and at p = 2 it has the
    closed form prod E f_c^2 - (prod mu_c)^2.
    """
    space = f.space
    head = math.prod(
        float(np.abs(f.factors[c - 1]) ** p @ space.weights(c)) ** (1 / p) for c in range(1, i + 1)
    )
    tail = math.prod(abs(f.mean_of(c)) for c in range(j + 1, space.n + 1))
    block = range(i + 1, j + 1)
    means = math.prod(f.mean_of(c) for c in block)
    if p == 2:
        second = math.prod(float(f.factors[c - 1] ** 2 @ space.weights(c)) for c in block)
        middle = math.sqrt(max(0.0, second - means**2))
    else:
        active = [c for c in block if np.ptp(f.factors[c - 1]) != 0]
        const = math.prod(float(f.factors[c - 1][0]) for c in block if c not in active)
        check_enumerable(space.count(active))
        table = np.array(const)
        for c in active:
            table = np.multiply.outer(table, f.factors[c - 1])
        weights = space.joint_weights(active)
        middle = float(np.sum(weights * np.abs(table - means) ** p)) ** (1 / p)
    return head * middle * tail


def martingale_gap(f: RandomVariable, i: int, j: int, p: float) -> float:
    """||E(f|S_j) - E(f|S_i)||_p."""
    if isinstance(f, Rank1):
        return _rank1_gap(f, i, j, p)
    return lp_norm(conditional_expectation(f, j).rv - conditional_expectation(f, i).rv, p)


def _gap_function(f: RandomVariable, p: float) -> Callable[[int, int], float]:
    if isinstance(f, Rank1):
        return lambda a, b: _rank1_gap(f, a, b, p)
    level = _LevelCache(f)
    return lambda a, b: lp_norm(level(b) - level(a), p)


def energy_increment_search(f: RandomVariable, theta: float, p: float) -> SearchResult:
    """First block pair (i, j) with ||E(f|S_j) - E(f|S_i)||_p <= theta."""
    if not 1 < p <= 2:
        raise InvalidP(f"p must lie in (1, 2], got {p}")
    norm = lp_norm(f, p)
    if norm > 1 + NORM_SLACK:
        raise PreconditionViolated(f"||f||_p = {norm!r} exceeds 1")
    return _block_scan(f.space.n, theta, p, _gap_function(f, p))


def _effective_p(f: RandomVariable, p: float) -> float:
    """Validate ||f||_p <= 1; exponents above 2 reduce to p = 2."""
    if not p > 1:
        raise InvalidP(f"p must exceed 1, got {p}")
    norm = lp_norm(f, p)
    if norm > 1 + NORM_SLACK:
        raise PreconditionViolated(f"||f||_p = {norm!r} exceeds 1 (p = {p})")
    return min(p, 2.0)


def _check_n(n: int, params: SearchParams) -> None:
    if n < _snap(2.0 / params.c):
        raise PreconditionViolated(
            f"n = {n} is too small: the minimal admissible n is {params.min_n} "
            f"(c = {params.c!r})"
        )


def locate_interval(f: RandomVariable, epsilon: float, p: float) -> Located:
    """Find an interval J with |J| >= c(epsilon, p) n along which f concentrates."""
    if not 0 < epsilon <= 1:
        raise InvalidParameter(f"epsilon must lie in (0, 1], got {epsilon}")
    p = _effective_p(f, p)
    params = SearchParams.theorem1(epsilon, p)
    n = f.space.n
    _check_n(n, params)
    i, j, gap = energy_increment_search(f, params.theta, p)
    J = IndexInterval(i + 1, j)
    if len(J) < params.c * n or i < 1:
        raise InternalContradiction(f"interval {J} violates |J| >= c n")
    return Located(J, params, gap)


# -- exact concentration probabilities -----------------------------------------


def _effective_coords(f: RandomVariable, I: CoordSet) -> CoordSet:
    """Coordinates of I that the section-mean map can actually depend on."""
    support = f.active_coords() if isinstance(f, Rank1) else f.coords
    return I.intersection(support)


def concentration_probability(f: RandomVariable, I: CoordSet, epsilon: float) -> float:
    """Exact P_I(|E(f_x) - E(f)| <= epsilon)."""
    check_split(f.space, I)
    mean = expectation(f)
    coords, table = as_table(section_mean_map(f, I))
    weights = f.space.joint_weights(coords)
    good = np.abs(table - mean) <= epsilon
    return min(1.0, float(np.sum(weights[good])))


@dataclass(frozen=True)
class SubsetPolicy:
    max_exhaustive: int = 4096
    random_subsets: int = 256
    seed: int = 0

    def subsets(self, J: IndexInterval) -> tuple[list[CoordSet], str]:
        members = J.coords().members
        k = len(members)
        if 2**k <= self.max_exhaustive:
            out = [
                CoordSet(combo)
                for r in range(1, k + 1)
                for combo in itertools.combinations(members, r)
            ]
            return out, f"exhaustive: all {len(out)} nonempty subsets of J"
        seen: dict[CoordSet, None] = {}
        for c in members:
            seen[CoordSet((c,))] = None
        for a in range(J.lo, J.hi + 1):
            for b in range(a, J.hi + 1):
                seen[CoordSet(tuple(range(a, b + 1)))] = None
        rng = rng_for(self.seed)
        for _ in range(self.random_subsets):
            mask = rng.random(k) < 0.5
            if not mask.any():
                mask[rng.integers(k)] = True
            seen[CoordSet(tuple(np.asarray(members)[mask].tolist()))] = None
        out = list(seen)
        return out, (
            f"structured: {k} singletons, all subintervals of J (including J), "
            f"{self.random_subsets} random subsets (seed {self.seed}); {len(out)} distinct"
        )


@dataclass(frozen=True)
class SubsetResult:
    I: CoordSet
    prob: float
    passed: bool
    estimate: Estimate | None = None

    def to_dict(self) -> dict:
        d = {"I": list(self.I), "prob": self.prob, "pass": self.passed}
        if self.estimate is not None:
            d.update(estimated=True, half_width=self.estimate.half_width,
                     confidence=self.estimate.confidence, samples=self.estimate.samples)
        return d


def _check_subsets(
    f: RandomVariable,
    subsets: Sequence[CoordSet],
    epsilon: float,
    montecarlo: MonteCarloConfig | None,
) -> tuple[SubsetResult, ...]:
    cache: dict[CoordSet, SubsetResult] = {}
    results = []
    for index, I in enumerate(subsets):
        key = _effective_coords(f, I)
        hit = cache.get(key)
        if hit is not None:
            results.append(SubsetResult(I, hit.prob, hit.passed, hit.estimate))
            continue
        try:
            prob = concentration_probability(f, I, epsilon)
            res = SubsetResult(I, prob, prob >= 1 - epsilon)
        except TooLargeToEnumerate:
            if montecarlo is None:
                raise
            est = estimate_concentration(
                f, I, epsilon, montecarlo.samples, montecarlo.confidence, montecarlo.seed, index
            )
            # sampled verdicts only fail when the upper confidence bound is below target
            res = SubsetResult(I, est.value, est.upper >= 1 - epsilon, est)
        cache[key] = res
        results.append(res)
    return tuple(results)


@dataclass(frozen=True)
class ConcentrationReport:
    interval: IndexInterval
    params: SearchParams
    martingale_gap: float
    subset_results: tuple[SubsetResult, ...]
    policy: str
    n: int
    statement: str = "theorem1"
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.subset_results)

    def to_dict(self) -> dict:
        return {
            "statement": self.statement,
            "n": self.n,
            "interval": {"lo": self.interval.lo, "hi": self.interval.hi},
            **self.params.to_dict(),
            "gap": self.martingale_gap,
            "policy": self.policy,
            "subsets": [r.to_dict() for r in self.subset_results],
            "pass": self.passed,
            **self.extras,
        }


def verify_theorem1(
    f: RandomVariable,
    epsilon: float,
    p: float,
    policy: SubsetPolicy = SubsetPolicy(),
    montecarlo: MonteCarloConfig | None = None,
) -> ConcentrationReport:
    """Locate J and check P_I(|E(f_x) - E(f)| <= epsilon) >= 1 - epsilon on subsets of J."""
    located = locate_interval(f, epsilon, p)
    subsets, description = policy.subsets(located.interval)
    results = _check_subsets(f, subsets, epsilon, montecarlo)
    return ConcentrationReport(
        located.interval, located.params, located.gap, results, description, f.space.n,
        extras={"p_input": p} if p != located.params.p else {},
    )


def _indicator_mass(A: RandomVariable) -> float:
    _, table = as_table(A)
    if not np.all((table == 0) | (table == 1)):
        raise NotAnIndicator("the event must be given by a 0/1-valued variable")
    return expectation(A)


def verify_corollary2(
    A: RandomVariable,
    epsilon: float,
    p: float,
    policy: SubsetPolicy = SubsetPolicy(),
    montecarlo: MonteCarloConfig | None = None,
) -> ConcentrationReport:
    """Sections of an event: |P(A_x) - P(A)| <= epsilon P(A)^{1/p} on a (1-epsilon)-fraction."""
    mass = _indicator_mass(A)
    f = A if mass == 0 else scale(A, mass ** (-1.0 / p))
    report = verify_theorem1(f, epsilon, p, policy, montecarlo)
    extras = dict(report.extras, event_probability=mass,
                  deviation_bound=epsilon * mass ** (1.0 / p))
    return ConcentrationReport(
        report.interval, report.params, report.martingale_gap, report.subset_results,
        report.policy, report.n, "corollary2", extras,
    )


def claim7_defects(f: RandomVariable, i: int, j: int, I: CoordSet) -> tuple[float, float]:
    """Largest |E(g_x) - E(f_x)| and |E(h_x) - E(f)| over x, with g = E(f|S_j), h = E(f|S_i)."""
    g = conditional_expectation(f, j).rv
    h = conditional_expectation(f, i).rv
    maps = [as_table(section_mean_map(rv, I)) for rv in (f, g, h)]
    coords = CoordSet.of(itertools.chain.from_iterable(cs for cs, _ in maps))
    mf, mg, mh = (broadcast_table(f.space, cs, t, coords) for cs, t in maps)
    return float(np.max(np.abs(mg - mf))), float(np.max(np.abs(mh - expectation(f))))


def pth_moment_of_deviation(f: RandomVariable, I: CoordSet, p: float) -> float:
    """int |E(f_x) - E(f)|^p dP_I(x)."""
    check_split(f.space, I)
    coords, table = as_table(section_mean_map(f, I))
    weights = f.space.joint_weights(coords)
    return float(np.sum(weights * np.abs(table - expectation(f)) ** p))


# -- the p = 1 counterexample ---------------------------------------------------


def p1_counterexample(n: int) -> tuple[ProductSpace, Rank1]:
    """Fair bits with A = A_1 x ... x A_n, A_i = {atom 0}, so P(A) = 2^-n."""
    if n < 2:
        raise InvalidParameter(f"the counterexample needs n >= 2, got {n}")
    space = uniform_product(2, n)
    return space, indicator_product(space, [[0]] * n)


@dataclass(frozen=True)
class CounterexampleReport:
    n: int
    event_probability: float
    min_deviation: float
    subsets_checked: int
    points_checked: int

    @property
    def passed(self) -> bool:
        return self.min_deviation >= self.event_probability

    def to_dict(self) -> dict:
        return {
            "statement": "p1_counterexample",
            "n": self.n,
            "event_probability": self.event_probability,
            "min_deviation": self.min_deviation,
            "subsets_checked": self.subsets_checked,
            "points_checked": self.points_checked,
            "pass": self.passed,
        }


def check_p1_counterexample(n: int) -> CounterexampleReport:
    """Every section of the product event misses P(A) by at least P(A)."""
    space, A = p1_counterexample(n)
    mass = expectation(A)
    coords = range(1, n + 1)
    worst = math.inf
    subsets = points = 0
    for r in range(1, n):
        for combo in itertools.combinations(coords, r):
            _, table = as_table(section_mean_map(A, CoordSet(combo)))
            worst = min(worst, float(np.min(np.abs(table - mass))))
            subsets += 1
            points += table.size
    return CounterexampleReport(n, mass, worst, subsets, points)


# -- uniform hypercubes: every section -------------------------------------------


def lemma8_min_n(k: int, m: int, eta: float) -> int:
    return snapped_ceil(16 * m * k ** (3 * m) / eta**3)


def lemma8_epsilon(k: int, m: int, eta: float) -> float:
    return eta * k ** (-m) * 2 ** (-1 / 3)


@dataclass(frozen=True)
class Lemma8Report:
    interval: IndexInterval
    located: IndexInterval
    k: int
    m: int
    eta: float
    epsilon: float
    min_n: int
    n: int
    event_probability: float
    max_deviation: float
    gap: float
    params: SearchParams

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.eta

    def to_dict(self) -> dict:
        return {
            "statement": "lemma8",
            "interval": {"lo": self.interval.lo, "hi": self.interval.hi},
            "located": {"lo": self.located.lo, "hi": self.located.hi},
            "k": self.k,
            "m": self.m,
            "eta": self.eta,
            "epsilon": self.epsilon,
            "min_n": self.min_n,
            "n": self.n,
            "event_probability": self.event_probability,
            "max_deviation": self.max_deviation,
            "gap": self.gap,
            "c": self.params.c,
            "theta": self.params.theta,
            "ell": self.params.ell,
            "pass": self.passed,
        }


def lemma8_interval(D: RandomVariable, k: int, m: int, eta: float) -> tuple[IndexInterval, Lemma8Report]:
    """An interval I of width m such that every section D_t, t in A^I, has mass within eta of P(D)."""
    if k < 2 or m < 1:
        raise InvalidParameter(f"need k >= 2 and m >= 1, got k={k}, m={m}")
    if not 0 < eta <= 1:
        raise InvalidParameter(f"eta must lie in (0, 1], got {eta}")
    space = D.space
    uniform = FiniteSpace((1.0 / k,) * k)
    if any(f != uniform for f in space.factors):
        raise InvalidParameter(f"the space must be a uniform product of {k}-atom factors")
    n = space.n
    min_n = lemma8_min_n(k, m, eta)
    if n < min_n:
        raise PreconditionViolated(f"n = {n} is too small: need n >= 16 m k^(3m) / eta^3, i.e. {min_n}")
    mass = _indicator_mass(D)
    epsilon = lemma8_epsilon(k, m, eta)
    f = D if mass == 0 else scale(D, mass**-0.5)
    J, params, gap = locate_interval(f, epsilon, 2.0)
    if len(J) < m:
        raise InternalContradiction(f"located interval {J} is shorter than m = {m}")
    I = IndexInterval(J.lo, J.lo + m - 1)
    _, table = as_table(section_mean_map(D, I.coords()))
    max_dev = float(np.max(np.abs(table - mass)))
    report = Lemma8Report(I, J, k, m, eta, epsilon, min_n, n, mass, max_dev, gap, params)
    if not report.passed:
        raise UniversalityFailed(f"a section deviates by {max_dev!r} > eta = {eta!r}")
    return I, report


# -- families indexed by a finite probability space --------------------------------


@dataclass(frozen=True, eq=False)
class ProcessFamily:
    t_weights: FiniteSpace
    members: tuple[RandomVariable, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if len(self.members) != self.t_weights.size:
            raise InvalidParameter("need exactly one member per atom of T")
        space = self.members[0].space
        if any(F.space != space for F in self.members):
            raise SpaceMismatch("all members must share one product space")

    @property
    def space(self) -> ProductSpace:
        return self.members[0].space

    def mixed_norm(self, p: float) -> float:
        """(sum_t mu(t) ||F_t||_p^p)^{1/p}."""
        return math.fsum(
            mu * lp_norm(F, p) ** p for mu, F in zip(self.t_weights.weights, self.members)
        ) ** (1.0 / p)


@dataclass(frozen=True)
class Theorem9Report:
    interval: IndexInterval
    params: SearchParams
    martingale_gap: float
    good: tuple[int, ...]
    good_mass: float
    l1_gaps: tuple[float, ...]
    member_results: tuple[tuple[int, tuple[SubsetResult, ...]], ...]
    policy: str
    n: int

    @property
    def passed(self) -> bool:
        return self.good_mass >= 1 - self.params.epsilon and all(
            r.passed for _, results in self.member_results for r in results
        )

    def to_dict(self) -> dict:
        return {
            "statement": "theorem9",
            "n": self.n,
            "interval": {"lo": self.interval.lo, "hi": self.interval.hi},
            **self.params.to_dict(),
            "gap": self.martingale_gap,
            "G": list(self.good),
            "mu_G": self.good_mass,
            "l1_gaps": list(self.l1_gaps),
            "policy": self.policy,
            "members": [
                {"t": t, "subsets": [r.to_dict() for r in results]}
                for t, results in self.member_results
            ],
            "pass": self.passed,
        }


def theorem9_locate(
    family: ProcessFamily,
    epsilon: float,
    p: float,
    policy: SubsetPolicy = SubsetPolicy(),
    montecarlo: MonteCarloConfig | None = None,
) -> tuple[tuple[int, ...], IndexInterval, Theorem9Report]:
    """A good index set G with mu(G) >= 1 - epsilon and one interval J serving every t in G."""
    params = SearchParams.theorem9(epsilon, p)
    norm = family.mixed_norm(p)
    if norm > 1 + NORM_SLACK:
        raise PreconditionViolated(f"mixed norm {norm!r} exceeds 1")
    n = family.space.n
    _check_n(n, params)
    gaps = [_gap_function(F, p) for F in family.members]
    mu = family.t_weights.weights

    def gap_at(a, b):
        return math.fsum(w * g(a, b) ** p for w, g in zip(mu, gaps)) ** (1.0 / p)

    i, j, gap = _block_scan(n, params.theta, p, gap_at)
    J = IndexInterval(i + 1, j)
    l1 = tuple(martingale_gap(F, i, j, 1.0) for F in family.members)
    good = tuple(t for t, v in enumerate(l1) if v <= epsilon**2)
    good_mass = math.fsum(family.t_weights.weights[t] for t in good)
    subsets, description = policy.subsets(J)
    member_results = tuple(
        (t, _check_subsets(family.members[t], subsets, epsilon, montecarlo)) for t in good
    )
    report = Theorem9Report(J, params, gap, good, good_mass, l1, member_results, description, n)
    return good, J, report
