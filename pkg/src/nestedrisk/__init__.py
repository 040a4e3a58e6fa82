"""Time consistency of aggregator/factor pairs on finite spaces."""

__version__ = "0.1.0"

from .consistency import (
    AggregatorFactorPair,
    build_subaggregator,
    check_stc,
    check_utc,
    check_wtc,
    verify_nested_formula,
)
from .riskmeasures import avar, conditional_avar, conditional_avar_blocks
from .space import FiniteProbSpace, Partition, expectation
from .verdict import Verdict

__all__ = [
    "AggregatorFactorPair",
    "FiniteProbSpace",
    "Partition",
    "Verdict",
    "avar",
    "build_subaggregator",
    "check_stc",
    "check_utc",
    "check_wtc",
    "conditional_avar",
    "conditional_avar_blocks",
    "expectation",
    "verify_nested_formula",
]
