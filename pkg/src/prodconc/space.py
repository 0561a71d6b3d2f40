"""Finite probability spaces, their products, and coordinate bookkeeping.

Coordinates are 1-based throughout; atom indices within a factor are 0-based.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    EmptyCoordSet,
    IndexOutOfRange,
    InvalidParameter,
    NotAProbability,
    TooLargeToEnumerate,
)

PROB_TOL = 1e-12
DEFAULT_ENUM_CAP = 2**24
ENUM_CAP_ENV = "PRODCONC_ENUM_CAP"


def enumeration_cap(cap: int | None = None) -> int:
    """Resolve the enumeration cap: explicit value, then environment, then default."""
    if cap is not None:
        return int(cap)
    env = os.environ.get(ENUM_CAP_ENV)
    return int(env) if env else DEFAULT_ENUM_CAP


def check_enumerable(count: int, cap: int | None = None) -> None:
    limit = enumeration_cap(cap)
    if count > limit:
        raise TooLargeToEnumerate(f"{count} outcomes exceeds enumeration cap {limit}")


@dataclass(frozen=True)
class FiniteSpace:
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.weights) == 0:
            raise NotAProbability("a finite space needs at least one atom")
        if any(not w > 0 for w in self.weights):
            raise NotAProbability(f"atom weights must be positive: {self.weights}")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > PROB_TOL:
            raise NotAProbability(f"atom weights sum to {total!r}, not 1")

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def is_uniform(self) -> bool:
        return all(w == self.weights[0] for w in self.weights)


def make_finite_space(weights: Iterable[float]) -> FiniteSpace:
    return FiniteSpace(tuple(float(w) for w in weights))


@dataclass(frozen=True, order=True)
class CoordSet:
    """A set of 1-based coordinate indices, stored sorted."""

    members: tuple[int, ...]

    def __post_init__(self):
        m = self.members
        if any(not isinstance(c, (int, np.integer)) for c in m):
            raise IndexOutOfRange(f"coordinates must be integers: {m}")
        if any(c < 1 for c in m):
            raise IndexOutOfRange(f"coordinates are 1-based: {m}")
        if any(a >= b for a, b in zip(m, m[1:])):
            raise IndexOutOfRange(f"coordinates must be strictly increasing: {m}")
        object.__setattr__(self, "members", tuple(int(c) for c in m))

    @classmethod
    def of(cls, coords: Iterable[int]) -> "CoordSet":
        return cls(tuple(sorted(set(int(c) for c in coords))))

    @classmethod
    def full(cls, n: int) -> "CoordSet":
        return cls(tuple(range(1, n + 1)))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, c) -> bool:
        return c in self.members

    def __bool__(self) -> bool:
        return bool(self.members)

    def complement(self, n: int) -> "CoordSet":
        inside = set(self.members)
        return CoordSet(tuple(c for c in range(1, n + 1) if c not in inside))

    def intersection(self, other: Iterable[int]) -> "CoordSet":
        other = set(other)
        return CoordSet(tuple(c for c in self.members if c in other))

    def union(self, other: Iterable[int]) -> "CoordSet":
        return CoordSet.of(set(self.members) | set(other))

    def check_within(self, n: int) -> None:
        if self.members and self.members[-1] > n:
            raise IndexOutOfRange(f"coordinate {self.members[-1]} exceeds n = {n}")


@dataclass(frozen=True)
class IndexInterval:
    """The contiguous coordinate block {lo, ..., hi}, inclusive."""

    lo: int
    hi: int

    def __post_init__(self):
        if not 1 <= self.lo <= self.hi:
            raise InvalidParameter(f"invalid interval [{self.lo}, {self.hi}]")

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def coords(self) -> CoordSet:
        return CoordSet(tuple(range(self.lo, self.hi + 1)))

    def check_within(self, n: int) -> None:
        if self.hi > n:
            raise IndexOutOfRange(f"interval end {self.hi} exceeds n = {n}")


@dataclass(frozen=True)
class Outcome:
    """A point of Omega_I: one atom index per coordinate of ``coords``."""

    coords: CoordSet
    atoms: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) != len(self.atoms):
            raise IndexOutOfRange("an outcome needs exactly one atom per coordinate")
        object.__setattr__(self, "atoms", tuple(int(a) for a in self.atoms))

    @classmethod
    def from_mapping(cls, mapping: dict[int, int]) -> "Outcome":
        coords = CoordSet.of(mapping)
        return cls(coords, tuple(mapping[c] for c in coords))

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.coords.members, self.atoms))

    def __getitem__(self, coord: int) -> int:
        return self.atoms[self.coords.members.index(coord)]

    def merge(self, other: "Outcome") -> "Outcome":
        """The concatenated outcome (x, y) over disjoint coordinate sets."""
        d = self.as_dict()
        if set(d) & set(other.coords.members):
            raise IndexOutOfRange("cannot merge outcomes on overlapping coordinates")
        d.update(other.as_dict())
        return Outcome.from_mapping(d)


@dataclass(frozen=True)
class ProductSpace:
    factors: tuple[FiniteSpace, ...]

    def __post_init__(self):
        if len(self.factors) < 1:
            raise InvalidParameter("a product space needs at least one factor")

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.factors)

    def factor(self, coord: int) -> FiniteSpace:
        if not 1 <= coord <= self.n:
            raise IndexOutOfRange(f"coordinate {coord} outside 1..{self.n}")
        return self.factors[coord - 1]

    def weights(self, coord: int) -> np.ndarray:
        return self.factor(coord).array

    def count(self, coords: Iterable[int]) -> int:
        return math.prod(self.factor(c).size for c in coords)

    def all_coords(self) -> CoordSet:
        return CoordSet.full(self.n)

    def check_outcome(self, x: Outcome) -> None:
        x.coords.check_within(self.n)
        for c, a in zip(x.coords, x.atoms):
            if not 0 <= a < self.factor(c).size:
                raise IndexOutOfRange(f"atom {a} invalid for coordinate {c}")

    def joint_weights(self, coords: Sequence[int]) -> np.ndarray:
        """Product-measure weight tensor over ``coords`` (one axis per coordinate)."""
        w = np.ones(())
        for c in coords:
            w = np.multiply.outer(w, self.weights(c))
        return w


def product_space(factors: Iterable[FiniteSpace]) -> ProductSpace:
    return ProductSpace(tuple(factors))


def uniform_product(k: int, n: int) -> ProductSpace:
    if k < 2 or n < 1:
        raise InvalidParameter(f"uniform product needs k >= 2 and n >= 1, got k={k}, n={n}")
    factor = FiniteSpace((1.0 / k,) * k)
    return ProductSpace((factor,) * n)


def restrict(space: ProductSpace, I: CoordSet) -> ProductSpace:
    if not I:
        raise EmptyCoordSet("cannot restrict to an empty coordinate set")
    I.check_within(space.n)
    return ProductSpace(tuple(space.factor(c) for c in I))


def outcome_weight(space: ProductSpace, x: Outcome) -> float:
    space.check_outcome(x)
    return math.prod(space.factor(c).weights[a] for c, a in zip(x.coords, x.atoms))


def enumerate_outcomes(
    space: ProductSpace, I: CoordSet, cap: int | None = None
) -> Iterator[tuple[Outcome, float]]:
    """Yield every outcome over ``I`` once, with its marginal weight."""
    if not I:
        raise EmptyCoordSet("cannot enumerate an empty coordinate set")
    I.check_within(space.n)
    check_enumerable(space.count(I), cap)
    factors = [space.factor(c) for c in I]
    for atoms in itertools.product(*(range(f.size) for f in factors)):
        weight = math.prod(f.weights[a] for f, a in zip(factors, atoms))
        yield Outcome(I, atoms), weight
