"""Brute-force reference implementations backing the test suite.

Everything here is deliberately slow, simple, and independent of the fast
matchers: an augmenting-path maximum matching over the explicit feasibility
graph, an O(K*L) greedy scan with the shared tie rule, and exhaustive
permutation search for complete matchings. Hard size guards keep accidental
large runs from silently degrading the checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .calipers import as_caliper
from .core import (
    GroupSizeError,
    InputValidationError,
    MatchResult,
    OracleSizeError,
    ScoreSet,
    make_match_result,
)
from .nearest import resolve_processing_order

__all__ = [
    "FeasibilityGraph",
    "feasibility_graph",
    "max_matching_size",
    "max_matching_size_one_to_n",
    "reference_nn_match",
    "min_cost_complete_bruteforce",
    "max_cost_complete_bruteforce",
]

PAIR_GUARD = 10_000
COMPLETE_GUARD = 7


def _guard(n_treated: int, n_control: int) -> None:
    if n_treated * n_control > PAIR_GUARD:
        raise OracleSizeError(
            f"instance of {n_treated} x {n_control} exceeds the brute-force "
            f"guard of {PAIR_GUARD} treated-control pairs"
        )


@dataclass(frozen=True)
class FeasibilityGraph:
    """Explicit caliper feasibility: adjacency[i] lists every control j with
    |X_i - Y_j| <= c(X_i, Y_j). The edge set equals the predicate exactly; no
    pruning."""

    n_treated: int
    n_control: int
    adjacency: tuple[tuple[int, ...], ...]


def feasibility_graph(scores: ScoreSet, caliper) -> FeasibilityGraph:
    """Materialize every feasible (treated, control) edge."""
    caliper = as_caliper(caliper)
    K, L = scores.n_treated, scores.n_control
    _guard(K, L)
    X = scores.treated_scores.tolist()
    Y = scores.control_scores.tolist()
    adjacency = tuple(
        tuple(j for j in range(L) if abs(X[i] - Y[j]) <= caliper(X[i], Y[j]))
        for i in range(K)
    )
    return FeasibilityGraph(n_treated=K, n_control=L, adjacency=adjacency)


def max_matching_size(graph: FeasibilityGraph) -> int:
    """Maximum-cardinality bipartite matching size via augmenting paths."""
    _guard(graph.n_treated, graph.n_control)
    matched_control: dict[int, int] = {}

    def augment(i: int, seen: set[int]) -> bool:
        for j in graph.adjacency[i]:
            if j in seen:
                continue
            seen.add(j)
            if j not in matched_control or augment(matched_control[j], seen):
                matched_control[j] = i
                return True
        return False

    size = 0
    for i in range(graph.n_treated):
        if augment(i, set()):
            size += 1
    return size


def max_matching_size_one_to_n(graph: FeasibilityGraph, n_controls: int) -> int:
    """Maximum matched controls when each treated may take up to n controls.

    Realized by replicating every treated vertex n times and running the
    one-to-one matcher on the blown-up graph.
    """
    if not isinstance(n_controls, int) or isinstance(n_controls, bool) or n_controls < 1:
        raise InputValidationError(
            f"n_controls must be a positive integer, got {n_controls!r}"
        )
    replicated = FeasibilityGraph(
        n_treated=graph.n_treated * n_controls,
        n_control=graph.n_control,
        adjacency=tuple(
            row for row in graph.adjacency for _ in range(n_controls)
        ),
    )
    return max_matching_size(replicated)


def reference_nn_match(
    scores: ScoreSet, caliper, order: str = "sorted", random_state=None
) -> MatchResult:
    """Greedy nearest-neighbor matching by plain O(K*L) scanning.

    Same processing orders and tie rule as the fast implementations: the
    candidates are the rightmost unmatched control strictly below the treated
    score and the leftmost unmatched control at-or-above it; the nearer wins,
    ties go to the lower score; the caliper is then tested against that single
    candidate only.
    """
    caliper = as_caliper(caliper)
    positions = resolve_processing_order(scores, order, random_state)
    X = scores.treated_scores
    Y = scores.control_scores
    L = Y.size
    free = np.ones(L, dtype=bool)
    treated: list[int] = []
    control: list[int] = []
    dists: list[float] = []
    for i in positions.tolist():
        x = float(X[i])
        split = int(np.searchsorted(Y, x, side="left"))
        below = np.flatnonzero(free[:split])
        at_or_above = np.flatnonzero(free[split:])
        left = int(below[-1]) if below.size else -1
        right = split + int(at_or_above[0]) if at_or_above.size else -1
        if left < 0 and right < 0:
            continue
        if right < 0:
            pick = left
        elif left < 0:
            pick = right
        else:
            pick = left if (x - Y[left]) <= (Y[right] - x) else right
        y = float(Y[pick])
        d = abs(x - y)
        if d <= caliper(x, y):
            treated.append(i)
            control.append(pick)
            dists.append(d)
            free[pick] = False
    return make_match_result(treated, control, dists, len(positions))


def _complete_cost_extremum(
    scores: ScoreSet, cost_exponent: float, maximize: bool
) -> tuple[float, tuple[int, ...]]:
    K, L = scores.n_treated, scores.n_control
    if K != L:
        raise GroupSizeError(
            f"complete matching requires equal group sizes, got {K} and {L}"
        )
    if K > COMPLETE_GUARD:
        raise OracleSizeError(
            f"group size {K} exceeds the exhaustive-permutation guard "
            f"of {COMPLETE_GUARD}"
        )
    if cost_exponent < 1:
        raise InputValidationError(
            f"cost_exponent must be >= 1, got {cost_exponent!r}"
        )
    X = scores.treated_scores.tolist()
    Y = scores.control_scores.tolist()
    best_cost = None
    best_perm: tuple[int, ...] = ()
    for perm in itertools.permutations(range(K)):
        cost = sum(abs(X[i] - Y[perm[i]]) ** cost_exponent for i in range(K))
        if (
            best_cost is None
            or (maximize and cost > best_cost)
            or (not maximize and cost < best_cost)
        ):
            best_cost = cost
            best_perm = perm
    return (0.0 if best_cost is None else float(best_cost)), best_perm


def min_cost_complete_bruteforce(
    scores: ScoreSet, cost_exponent: float = 1.0
) -> tuple[float, tuple[int, ...]]:
    """Exhaustive minimum of sum |X_i - Y_perm(i)|^p over all K! matchings.

    Returns (minimal cost, a witnessing permutation). K = L <= 7 enforced.
    """
    return _complete_cost_extremum(scores, cost_exponent, maximize=False)


def max_cost_complete_bruteforce(
    scores: ScoreSet, cost_exponent: float = 1.0
) -> tuple[float, tuple[int, ...]]:
    """Exhaustive maximum counterpart of min_cost_complete_bruteforce."""
    return _complete_cost_extremum(scores, cost_exponent, maximize=True)
