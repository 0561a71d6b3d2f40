"""Real random variables on finite product spaces.

Three representations are supported:

* ``Dense``  -- a full table with one axis per coordinate.
* ``Junta``  -- a table over a small support ``S``; coordinates outside ``S``
  are ignored.  Every operation costs ``O(prod_{s in S} |Omega_s|)``, never
  anything exponential in ``n``.
* ``Rank1``  -- a product of per-coordinate tables.

``Dense`` and ``Junta`` share one table-based implementation; a ``Dense``
variable is simply a table whose support is every coordinate.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyCoordSet,
    IndexOutOfRange,
    InvalidParameter,
    NonIncreasingCuts,
    SpaceMismatch,
    TooLargeToEnumerate,
)
from .space import CoordSet, Outcome, ProductSpace, check_enumerable, restrict

DEFAULT_JUNTA_CAP = 16
JUNTA_CAP_ENV = "PRODCONC_JUNTA_CAP"


def junta_cap() -> int:
    env = os.environ.get(JUNTA_CAP_ENV)
    return int(env) if env else DEFAULT_JUNTA_CAP


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


class RandomVariable:
    """Common interface; see the concrete representations below."""

    space: ProductSpace

    def __add__(self, other):
        return combine(self, other, np.add)

    def __sub__(self, other):
        return combine(self, other, np.subtract)

    def __mul__(self, c):
        return scale(self, c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return scale(self, 1.0 / c)

    def __neg__(self):
        return scale(self, -1.0)

    def __abs__(self):
        return absolute(self)


class TableRV(RandomVariable):
    """A variable stored as a table over a sorted coordinate support."""

    coords: CoordSet
    table: np.ndarray

    def _validate(self):
        self.coords.check_within(self.space.n)
        shape = tuple(self.space.factor(c).size for c in self.coords)
        if self.table.shape != shape:
            raise InvalidParameter(
                f"table shape {self.table.shape} does not match support shape {shape}"
            )
        check_enumerable(self.table.size)


@dataclass(frozen=True, eq=False)
class Dense(TableRV):
    space: ProductSpace
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "table", _frozen(self.table))
        self._validate()

    @property
    def coords(self) -> CoordSet:
        return self.space.all_coords()

    @classmethod
    def from_values(cls, space: ProductSpace, values: Sequence[float]) -> "Dense":
        """Build from a flat row-major list (coordinate 1 varies slowest)."""
        check_enumerable(len(values))
        values = np.asarray(values, dtype=float)
        if values.size != math.prod(space.sizes):
            raise InvalidParameter(
                f"expected {math.prod(space.sizes)} values, got {values.size}"
            )
        return cls(space, values.reshape(space.sizes))


@dataclass(frozen=True, eq=False)
class Junta(TableRV):
    space: ProductSpace
    coords: CoordSet
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "table", _frozen(self.table))
        self._validate()

    @classmethod
    def from_values(
        cls, space: ProductSpace, coords: Sequence[int], values: Sequence[float]
    ) -> "Junta":
        """Build from a flat row-major list over ``coords`` in the given order."""
        coords = [int(c) for c in coords]
        if len(coords) > junta_cap():
            raise TooLargeToEnumerate(
                f"junta support of size {len(coords)} exceeds cap {junta_cap()}"
            )
        if len(set(coords)) != len(coords):
            raise InvalidParameter(f"repeated junta coordinate in {coords}")
        for c in coords:
            space.factor(c)
        shape = [space.factor(c).size for c in coords]
        values = np.asarray(values, dtype=float)
        if values.size != math.prod(shape):
            raise InvalidParameter(f"expected {math.prod(shape)} values, got {values.size}")
        table = values.reshape(shape)
        order = np.argsort(coords, kind="stable")
        return cls(space, CoordSet.of(coords), np.transpose(table, order))


@dataclass(frozen=True, eq=False)
class Rank1(RandomVariable):
    space: ProductSpace
    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        factors = tuple(_frozen(f) for f in self.factors)
        object.__setattr__(self, "factors", factors)
        if len(factors) != self.space.n:
            raise InvalidParameter(f"need {self.space.n} factor tables, got {len(factors)}")
        for c, f in enumerate(factors, start=1):
            if f.shape != (self.space.factor(c).size,):
                raise InvalidParameter(f"factor table {c} has shape {f.shape}")

    def mean_of(self, coord: int) -> float:
        return float(self.factors[coord - 1] @ self.space.weights(coord))

    def active_coords(self) -> CoordSet:
        """Coordinates whose factor table is not constant."""
        return CoordSet(
            tuple(c for c, f in enumerate(self.factors, 1) if np.ptp(f) != 0)
        )


@dataclass(frozen=True, eq=False)
class FilteredRV:
    """E(f | S_level): a variable that only reads coordinates 1..level."""

    rv: RandomVariable
    level: int

    @property
    def space(self) -> ProductSpace:
        return self.rv.space

    def evaluate(self, x: Outcome) -> float:
        return evaluate(self.rv, x)


@dataclass(frozen=True, eq=False)
class MartingaleDiffs:
    diffs: tuple[RandomVariable, ...]
    levels: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.diffs)

    def partial_sum(self, r: int) -> RandomVariable:
        """d_1 + ... + d_r."""
        return reduce(lambda a, b: a + b, self.diffs[:r])

    def total(self) -> RandomVariable:
        return self.partial_sum(len(self.diffs))


# -- construction helpers ----------------------------------------------------


def constant(space: ProductSpace, value: float) -> Junta:
    return Junta(space, CoordSet(()), np.array(float(value)))


def indicator_product(space: ProductSpace, sets: Sequence[Iterable[int]]) -> Rank1:
    """Indicator of A_1 x ... x A_n given the atom sets A_i."""
    if len(sets) != space.n:
        raise InvalidParameter(f"need {space.n} atom sets, got {len(sets)}")
    tables = []
    for c, atoms in enumerate(sets, start=1):
        t = np.zeros(space.factor(c).size)
        for a in atoms:
            if not 0 <= a < t.size:
                raise IndexOutOfRange(f"atom {a} invalid for coordinate {c}")
            t[a] = 1.0
        tables.append(t)
    return Rank1(space, tuple(tables))


def as_table(rv: RandomVariable) -> tuple[CoordSet, np.ndarray]:
    """Support and table of ``rv``; a Rank1 variable is expanded over its active coordinates."""
    if isinstance(rv, TableRV):
        return rv.coords, rv.table
    if isinstance(rv, Rank1):
        active = rv.active_coords()
        check_enumerable(rv.space.count(active))
        const = math.prod(
            float(rv.factors[c - 1][0]) for c in range(1, rv.space.n + 1) if c not in active
        )
        table = np.array(const)
        for c in active:
            table = np.multiply.outer(table, rv.factors[c - 1])
        return active, table
    raise TypeError(f"not a random variable: {rv!r}")


def _table_rv(space: ProductSpace, coords: CoordSet, table: np.ndarray) -> TableRV:
    if len(coords) == space.n:
        return Dense(space, table)
    return Junta(space, coords, table)


def densify(rv: RandomVariable) -> Dense:
    coords, table = as_table(rv)
    full = rv.space.all_coords()
    return Dense(rv.space, broadcast_table(rv.space, coords, table, full))


def broadcast_table(space, coords: CoordSet, table: np.ndarray, target: CoordSet) -> np.ndarray:
    """Lift a table over ``coords`` onto the superset ``target``."""
    shape = [space.factor(c).size if c in coords else 1 for c in target]
    full = [space.factor(c).size for c in target]
    return np.broadcast_to(table.reshape(shape), full)


def _mean_out(space, coords: CoordSet, table: np.ndarray, drop) -> tuple[CoordSet, np.ndarray]:
    """Integrate the axes for coordinates in ``drop`` against their factor weights."""
    drop = set(drop)
    for ax in reversed(range(len(coords))):
        c = coords.members[ax]
        if c in drop:
            table = np.tensordot(table, space.weights(c), axes=([ax], [0]))
    return CoordSet(tuple(c for c in coords if c not in drop)), np.asarray(table)


def _same_space(a: RandomVariable, b: RandomVariable) -> None:
    if a.space != b.space:
        raise SpaceMismatch("random variables live on different product spaces")


def combine(a: RandomVariable, b, op) -> RandomVariable:
    """Pointwise ``op(a, b)``; ``b`` may be a scalar."""
    if not isinstance(b, RandomVariable):
        return combine(a, constant(a.space, float(b)), op)
    _same_space(a, b)
    if isinstance(a, Rank1) and isinstance(b, Rank1) and op is np.multiply:
        return Rank1(a.space, tuple(x * y for x, y in zip(a.factors, b.factors)))
    ca, ta = as_table(a)
    cb, tb = as_table(b)
    coords = ca.union(cb)
    table = op(broadcast_table(a.space, ca, ta, coords), broadcast_table(a.space, cb, tb, coords))
    if isinstance(a, Dense) or isinstance(b, Dense):
        return Dense(a.space, table)
    return _table_rv(a.space, coords, table)


def scale(rv: RandomVariable, c: float) -> RandomVariable:
    c = float(c)
    if isinstance(rv, Rank1):
        return Rank1(rv.space, (rv.factors[0] * c,) + rv.factors[1:])
    if isinstance(rv, Dense):
        return Dense(rv.space, rv.table * c)
    return Junta(rv.space, rv.coords, rv.table * c)


def abs_power(rv: RandomVariable, p: float = 1.0) -> RandomVariable:
    """The pointwise |f|^p."""
    if isinstance(rv, Rank1):
        return Rank1(rv.space, tuple(np.abs(f) ** p for f in rv.factors))
    if isinstance(rv, Dense):
        return Dense(rv.space, np.abs(rv.table) ** p)
    return Junta(rv.space, rv.coords, np.abs(rv.table) ** p)


def absolute(rv: RandomVariable) -> RandomVariable:
    return abs_power(rv, 1.0)


# -- core operations ----------------------------------------------------------


def evaluate(rv: RandomVariable, x: Outcome) -> float:
    """f(x) at a full outcome ``x``."""
    space = rv.space
    if x.coords != space.all_coords():
        raise IndexOutOfRange("evaluation needs a full outcome over 1..n")
    space.check_outcome(x)
    if isinstance(rv, Rank1):
        return math.prod(float(f[a]) for f, a in zip(rv.factors, x.atoms))
    return float(rv.table[tuple(x.atoms[c - 1] for c in rv.coords)])


def expectation(rv: RandomVariable) -> float:
    if isinstance(rv, Rank1):
        return math.prod(rv.mean_of(c) for c in range(1, rv.space.n + 1))
    coords, table = _mean_out(rv.space, rv.coords, rv.table, rv.coords)
    return float(table)


def lp_norm(rv: RandomVariable, p: float) -> float:
    if not p >= 1:
        raise InvalidParameter(f"L_p norm needs p >= 1, got {p}")
    if isinstance(rv, Rank1):
        return math.prod(
            float(np.abs(f) ** p @ rv.space.weights(c)) ** (1.0 / p)
            for c, f in enumerate(rv.factors, start=1)
        )
    _, m = _mean_out(rv.space, rv.coords, np.abs(rv.table) ** p, rv.coords)
    return float(m) ** (1.0 / p)


def check_split(space: ProductSpace, I: CoordSet) -> CoordSet:
    if not I:
        raise EmptyCoordSet("the section coordinates I must be nonempty")
    I.check_within(space.n)
    rest = I.complement(space.n)
    if not rest:
        raise EmptyCoordSet("the complement of I must be nonempty")
    return rest


def _check_point(space: ProductSpace, I: CoordSet, x: Outcome) -> None:
    if x.coords != I:
        raise IndexOutOfRange("the outcome must be over exactly the coordinates I")
    space.check_outcome(x)


def section(rv: RandomVariable, I: CoordSet, x: Outcome) -> RandomVariable:
    """f_x on Omega_{I^c}: coordinates of I^c are renumbered 1..|I^c| in order."""
    rest = check_split(rv.space, I)
    _check_point(rv.space, I, x)
    sub = restrict(rv.space, rest)
    relabel = {c: pos for pos, c in enumerate(rest, start=1)}
    if isinstance(rv, Rank1):
        s = math.prod(float(rv.factors[c - 1][x[c]]) for c in I)
        tables = [rv.factors[c - 1] for c in rest]
        tables[0] = tables[0] * s
        return Rank1(sub, tuple(tables))
    index = tuple(x[c] if c in I else slice(None) for c in rv.coords)
    table = rv.table[index]
    coords = CoordSet(tuple(relabel[c] for c in rv.coords if c not in I))
    if isinstance(rv, Dense):
        return Dense(sub, table)
    return Junta(sub, coords, table)


def section_mean_map(rv: RandomVariable, I: CoordSet) -> RandomVariable:
    """The map x -> E(f_x), as a variable on the full space reading only I.

    This is also the conditional expectation of f given the coordinates in I.
    """
    I.check_within(rv.space.n)
    if isinstance(rv, Rank1):
        tables = tuple(
            f if c in I else np.full(f.shape, rv.mean_of(c))
            for c, f in enumerate(rv.factors, start=1)
        )
        return Rank1(rv.space, tables)
    drop = [c for c in rv.coords if c not in I]
    coords, table = _mean_out(rv.space, rv.coords, rv.table, drop)
    if isinstance(rv, Dense) and not drop:
        return rv
    return Junta(rv.space, coords, table)


def section_mean(rv: RandomVariable, I: CoordSet, x: Outcome) -> float:
    """E(f_x) without materialising the section."""
    check_split(rv.space, I)
    _check_point(rv.space, I, x)
    if isinstance(rv, Rank1):
        inner = math.prod(float(rv.factors[c - 1][x[c]]) for c in I)
        outer = math.prod(rv.mean_of(c) for c in I.complement(rv.space.n))
        return inner * outer
    m = section_mean_map(rv, I)
    return float(m.table[tuple(x[c] for c in m.coords)])


def section_means_at(rv: RandomVariable, I: CoordSet, atoms: np.ndarray) -> np.ndarray:
    """Vectorised E(f_x) for many outcomes; ``atoms`` has one column per coordinate of I."""
    check_split(rv.space, I)
    atoms = np.asarray(atoms, dtype=np.intp)
    col = {c: k for k, c in enumerate(I)}
    if isinstance(rv, Rank1):
        out = np.full(atoms.shape[0], math.prod(rv.mean_of(c) for c in I.complement(rv.space.n)))
        for c in I:
            out = out * rv.factors[c - 1][atoms[:, col[c]]]
        return out
    m = section_mean_map(rv, I)
    index = tuple(atoms[:, col[c]] for c in m.coords)
    return np.broadcast_to(m.table[index], (atoms.shape[0],)).copy()


def conditional_expectation(rv: RandomVariable, m: int) -> FilteredRV:
    """E(f | S_m): average out coordinates m+1..n.  ``m = 0`` gives the constant E(f)."""
    n = rv.space.n
    if not 0 <= m <= n:
        raise IndexOutOfRange(f"filtration level {m} outside 0..{n}")
    if m == n:
        return FilteredRV(rv, m)
    if m == 0:
        return FilteredRV(constant(rv.space, expectation(rv)), 0)
    return FilteredRV(section_mean_map(rv, CoordSet(tuple(range(1, m + 1)))), m)


def martingale_differences(rv: RandomVariable, cuts: Sequence[int]) -> MartingaleDiffs:
    cuts = tuple(int(c) for c in cuts)
    if not cuts:
        raise NonIncreasingCuts("at least one cut is required")
    if any(a >= b for a, b in zip(cuts, cuts[1:])):
        raise NonIncreasingCuts(f"cuts must be strictly increasing: {cuts}")
    if cuts[0] < 1 or cuts[-1] > rv.space.n:
        raise IndexOutOfRange(f"cuts must lie in 1..{rv.space.n}: {cuts}")
    levels = [conditional_expectation(rv, m).rv for m in cuts]
    diffs = [levels[0]] + [b - a for a, b in zip(levels, levels[1:])]
    return MartingaleDiffs(tuple(diffs), cuts)
