"""Caliper matching of treated and control groups on a scalar score.

The package pairs objects from two groups by a one-dimensional index (for
example a propensity score) subject to a caliper: a pair (x, y) is admissible
only when |x - y| <= c(x, y). It provides

* maximum-cardinality one-to-one and one-to-n matching in linear time on
  sorted scores, for constant and certified variable-width calipers,
* the piecewise variant for nondecreasing step calipers,
* greedy nearest-neighbor matching without replacement (linear-time sorted
  scan and an order-free balanced-tree version), with rank rematching that
  never worsens distances,
* complete matchings of equal-size groups minimizing or maximizing convex
  pair costs,
* the inverse search for the smallest constant caliper reaching a target
  pair count,
* brute-force oracles for testing, a Monte-Carlo comparison harness, a CLI,
  and scikit-learn style estimator wrappers.
"""

from .calipers import (
    Caliper,
    CaliperReport,
    ConstantCaliper,
    FunctionCaliper,
    SeparableLipschitzCaliper,
    StepSumCaliper,
    as_caliper,
    load_caliper_file,
    parse_caliper_spec,
    validate_caliper,
)
from .core import (
    CaliperError,
    GroupSizeError,
    InfeasibleTargetError,
    InputValidationError,
    MatchResult,
    MatchingError,
    OracleSizeError,
    ScoreSet,
    prepare_score_set,
)
from .estimators import CompleteMatcher, MaximalMatcher, NearestNeighborMatcher
from .maximal import (
    IntervalIndex,
    build_interval_index,
    match_one_to_n,
    match_one_to_one,
    match_one_to_one_piecewise,
    min_constant_caliper,
)
from .nearest import (
    ControlTree,
    complete_match_max_cost,
    complete_match_min_cost,
    nn_match_sorted,
    nn_match_tree,
    rematch_by_rank,
    resolve_processing_order,
)
from .simulate import (
    ALGORITHMS,
    STATISTICS,
    AlgorithmStats,
    SimConfig,
    SimSummary,
    emit_cdf,
    run_simulation,
)

__version__ = "0.1.0"

__all__ = [
    "Caliper",
    "CaliperReport",
    "ConstantCaliper",
    "FunctionCaliper",
    "SeparableLipschitzCaliper",
    "StepSumCaliper",
    "as_caliper",
    "load_caliper_file",
    "parse_caliper_spec",
    "validate_caliper",
    "CaliperError",
    "GroupSizeError",
    "InfeasibleTargetError",
    "InputValidationError",
    "MatchResult",
    "MatchingError",
    "OracleSizeError",
    "ScoreSet",
    "prepare_score_set",
    "CompleteMatcher",
    "MaximalMatcher",
    "NearestNeighborMatcher",
    "IntervalIndex",
    "build_interval_index",
    "match_one_to_n",
    "match_one_to_one",
    "match_one_to_one_piecewise",
    "min_constant_caliper",
    "ControlTree",
    "complete_match_max_cost",
    "complete_match_min_cost",
    "nn_match_sorted",
    "nn_match_tree",
    "rematch_by_rank",
    "resolve_processing_order",
    "ALGORITHMS",
    "STATISTICS",
    "AlgorithmStats",
    "SimConfig",
    "SimSummary",
    "emit_cdf",
    "run_simulation",
]
