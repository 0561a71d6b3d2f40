"""Exact concentration of section means on finite product probability spaces."""

from .concentration import (
    ConcentrationReport,
    ProcessFamily,
    SearchParams,
    SubsetPolicy,
    check_p1_counterexample,
    concentration_probability,
    energy_increment_search,
    lemma8_interval,
    locate_interval,
    p1_counterexample,
    theorem9_locate,
    verify_corollary2,
    verify_theorem1,
)
from .randvar import (
    Dense,
    Junta,
    Rank1,
    conditional_expectation,
    expectation,
    lp_norm,
    martingale_differences,
    section,
    section_mean,
)
from .space import CoordSet, IndexInterval, Outcome, make_finite_space, uniform_product

__version__ = "0.1.0"

__all__ = [
    "ConcentrationReport",
    "CoordSet",
    "Dense",
    "IndexInterval",
    "Junta",
    "Outcome",
    "ProcessFamily",
    "Rank1",
    "SearchParams",
    "SubsetPolicy",
    "check_p1_counterexample",
    "concentration_probability",
    "conditional_expectation",
    "energy_increment_search",
    "expectation",
    "lemma8_interval",
    "locate_interval",
    "lp_norm",
    "make_finite_space",
    "martingale_differences",
    "p1_counterexample",
    "section",
    "section_mean",
    "theorem9_locate",
    "uniform_product",
    "verify_corollary2",
    "verify_theorem1",
]
