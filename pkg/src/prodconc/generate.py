"""Seeded random instances: tables, juntas, events, unit-norm rescaling."""

from __future__ import annotations

import numpy as np

from .randvar import Dense, Junta, RandomVariable, lp_norm, scale
from .space import CoordSet, ProductSpace


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """A Philox generator keyed by ``seed`` and split by the integers in ``stream``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=stream)))


def random_dense(space: ProductSpace, rng: np.random.Generator) -> Dense:
    return Dense(space, rng.uniform(-1.0, 1.0, size=space.sizes))


def random_junta(
    space: ProductSpace, rng: np.random.Generator, support: int, coords=None
) -> Junta:
    """Uniform[-1, 1] entries over ``support`` random coordinates (or the given ``coords``)."""
    if coords is None:
        support = min(support, space.n)
        coords = rng.choice(np.arange(1, space.n + 1), size=support, replace=False)
    coords = CoordSet.of(coords)
    shape = tuple(space.factor(c).size for c in coords)
    return Junta(space, coords, rng.uniform(-1.0, 1.0, size=shape))


def random_event(
    space: ProductSpace, rng: np.random.Generator, support: int, density: float | None = None
) -> Junta:
    """A 0/1 junta; each support outcome is included with probability ``density``."""
    if density is None:
        density = rng.uniform(0.1, 0.9)
    support = min(support, space.n)
    coords = CoordSet.of(rng.choice(np.arange(1, space.n + 1), size=support, replace=False))
    shape = tuple(space.factor(c).size for c in coords)
    return Junta(space, coords, (rng.random(shape) < density).astype(float))


def normalized(rv: RandomVariable, p: float, bound: float = 1.0) -> RandomVariable:
    """Rescale so that the L_p norm is at most ``bound``; the zero variable is left alone."""
    norm = lp_norm(rv, p)
    if norm == 0:
        return rv
    out = scale(rv, bound / norm)
    # rounding can leave the norm a few ulps above the bound
    while lp_norm(out, p) > bound:
        out = scale(out, 1.0 - 1e-15)
    return out
