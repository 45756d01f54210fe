"""Exact experiments on reduced-numerator approximation sets on the circle."""
from .approxsets import (
    Const,
    Coprime,
    FixedCut,
    Full,
    Indicator,
    LogPow,
    LogPower,
    Power,
    PrimesOnly,
    Table,
    build_E,
    measure_E,
    parse_policy,
    parse_psi,
    support_cardinality,
)
from .circleset import CircleIntervalSet, intersect, normalize, union
from .overlap import (
    borel_cantelli_bound,
    intersect_pair,
    overlap_sums,
    pair_overlap,
    quasi_independence,
    union_measure,
)

__version__ = "0.1.0"
