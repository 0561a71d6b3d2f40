"""Sampled concentration probabilities with Hoeffding confidence bounds.

Used when the section-mean map over ``I`` is too large to tabulate, which in
practice means a ``Rank1`` variable with many active coordinates inside ``I``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import EmptyCoordSet, InvalidParameter
from .generate import rng_for
from .randvar import RandomVariable, expectation, section_means_at
from .space import CoordSet, Outcome, ProductSpace


def hoeffding_half_width(samples: int, confidence: float) -> float:
    """Two-sided Hoeffding radius for the mean of ``samples`` [0, 1]-valued draws."""
    if samples < 1 or not 0 < confidence < 1:
        raise InvalidParameter("need samples >= 1 and 0 < confidence < 1")
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * samples))


def required_samples(half_width: float, confidence: float) -> int:
    """Smallest sample count whose Hoeffding radius is at most ``half_width``."""
    if not half_width > 0 or not 0 < confidence < 1:
        raise InvalidParameter("need half_width > 0 and 0 < confidence < 1")
    return math.ceil(math.log(2.0 / (1.0 - confidence)) / (2.0 * half_width**2))


@dataclass(frozen=True)
class Estimate:
    value: float
    half_width: float
    confidence: float
    samples: int
    seed: int

    @property
    def lower(self) -> float:
        return max(0.0, self.value - self.half_width)

    @property
    def upper(self) -> float:
        return min(1.0, self.value + self.half_width)

    def brackets(self, exact: float) -> bool:
        return abs(self.value - exact) <= self.half_width

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MonteCarloConfig:
    samples: int = 1060
    confidence: float = 0.99
    seed: int = 0


def sample_outcomes(
    space: ProductSpace, I: CoordSet, rng: np.random.Generator, size: int
) -> np.ndarray:
    """``size`` independent draws over ``I``: one row per draw, one column per coordinate."""
    if not I:
        raise EmptyCoordSet("cannot sample over an empty coordinate set")
    I.check_within(space.n)
    out = np.empty((size, len(I)), dtype=np.intp)
    for k, c in enumerate(I):
        w = space.weights(c)
        out[:, k] = rng.choice(w.size, size=size, p=w)
    return out


def sample_outcome(space: ProductSpace, I: CoordSet, rng: np.random.Generator) -> Outcome:
    return Outcome(I, tuple(sample_outcomes(space, I, rng, 1)[0]))


def estimate_concentration(
    f: RandomVariable,
    I: CoordSet,
    epsilon: float,
    samples: int,
    confidence: float,
    seed: int,
    stream: int = 0,
) -> Estimate:
    """Estimate P_I(|E(f_x) - E(f)| <= epsilon) from ``samples`` draws of x."""
    half = hoeffding_half_width(samples, confidence)
    rng = rng_for(seed, stream)
    atoms = sample_outcomes(f.space, I, rng, samples)
    dev = np.abs(section_means_at(f, I, atoms) - expectation(f))
    value = float(np.count_nonzero(dev <= epsilon)) / samples
    return Estimate(value, half, confidence, samples, seed)
