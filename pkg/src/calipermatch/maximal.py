"""Maximum-cardinality matching on sorted scores under certified calipers.

``match_one_to_one`` walks both sorted arrays once with two cursors and
collects every feasible pair; with a Lipschitz-certified caliper this attains
the largest possible number of one-to-one pairs in O(K + L) iterations, and
the pairs come out non-crossing. ``match_one_to_n`` generalizes to at most n
controls per treated object and maximizes the number of matched controls.
``match_one_to_one_piecewise`` handles step-sum calipers (which may jump and
thus break the Lipschitz condition) by keeping one cursor per step interval;
its work is O((U + V) * N) for U treated and V control intervals.

``min_constant_caliper`` answers the inverse question: the smallest constant
width at which a target share of the possible pairs can still be matched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calipers import (
    Caliper,
    ConstantCaliper,
    SeparableLipschitzCaliper,
    StepSumCaliper,
    as_caliper,
    validate_caliper,
)
from .core import (
    CaliperError,
    InfeasibleTargetError,
    InputValidationError,
    MatchResult,
    ScoreSet,
    make_match_result,
)

__all__ = [
    "match_one_to_one",
    "match_one_to_n",
    "match_one_to_one_piecewise",
    "IntervalIndex",
    "build_interval_index",
    "min_constant_caliper",
]


def _require_lipschitz(caliper: Caliper, scores: ScoreSet) -> Caliper:
    """Certify the caliper for the sorted two-pointer matchers.

    Step calipers are rejected (their jumps void the maximality argument
    here); bare callables and FunctionCaliper pass through unchecked.
    """
    caliper = as_caliper(caliper)
    if isinstance(caliper, StepSumCaliper):
        raise CaliperError(
            "step-sum calipers are not Lipschitz; use match_one_to_one_piecewise"
        )
    if isinstance(caliper, (ConstantCaliper, SeparableLipschitzCaliper)):
        validate_caliper(caliper, scores)
    return caliper


def match_one_to_one(scores: ScoreSet, caliper) -> MatchResult:
    """Maximum-cardinality one-to-one matching under a Lipschitz caliper.

    The current treated and control scores are paired whenever they are within
    the caliper; otherwise the smaller of the two is discarded for good. Ties
    |x - y| == c compare exactly (no epsilon): widen the caliper for slack.
    """
    caliper = _require_lipschitz(caliper, scores)
    xs = scores.treated_scores.tolist()
    ys = scores.control_scores.tolist()
    K, L = len(xs), len(ys)
    treated: list[int] = []
    control: list[int] = []
    dists: list[float] = []
    i = j = 0
    iterations = 0
    while i < K and j < L:
        iterations += 1
        x = xs[i]
        y = ys[j]
        d = abs(x - y)
        if d <= caliper(x, y):
            treated.append(i)
            control.append(j)
            dists.append(d)
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    return make_match_result(treated, control, dists, iterations)


def match_one_to_n(scores: ScoreSet, caliper, n_controls: int) -> MatchResult:
    """Match each treated object to at most ``n_controls`` controls.

    Maximizes the number of matched controls (not the number of matched
    treated objects). With ``n_controls=1`` the result is identical to
    match_one_to_one. ``controls_per_treated`` records how many controls each
    matched treated object received.
    """
    if not isinstance(n_controls, int) or isinstance(n_controls, bool) or n_controls < 1:
        raise InputValidationError(f"n_controls must be a positive integer, got {n_controls!r}")
    caliper = _require_lipschitz(caliper, scores)
    xs = scores.treated_scores.tolist()
    ys = scores.control_scores.tolist()
    K, L = len(xs), len(ys)
    treated: list[int] = []
    control: list[int] = []
    dists: list[float] = []
    counts: dict[int, int] = {}
    i = j = 0
    k = 0
    iterations = 0
    while i < K and j < L:
        iterations += 1
        x = xs[i]
        y = ys[j]
        d = abs(x - y)
        if d <= caliper(x, y):
            k += 1
            treated.append(i)
            control.append(j)
            dists.append(d)
            counts[i] = k
            if k == n_controls:
                k = 0
                i += 1
            j += 1
        elif x < y:
            k = 0
            i += 1
        else:
            j += 1
    return make_match_result(treated, control, dists, iterations, counts)


@dataclass(frozen=True)
class IntervalIndex:
    """Interval boundaries for the piecewise matcher.

    ``treated_bounds[u] .. treated_bounds[u+1]`` delimit the block of sorted
    treated positions whose scores fall in the u-th (non-empty) caliper step
    interval; the final entry equals K and acts as a sentinel. Likewise for
    controls. ``treated_cursors`` / ``control_cursors`` are the initial
    per-interval next-unused positions (fresh mutable copies of the bounds);
    the matcher advances its own copies past matched or discarded positions.
    """

    treated_bounds: np.ndarray
    control_bounds: np.ndarray

    @property
    def treated_cursors(self) -> np.ndarray:
        return self.treated_bounds.copy()

    @property
    def control_cursors(self) -> np.ndarray:
        return self.control_bounds.copy()

    @property
    def n_treated_intervals(self) -> int:
        return int(self.treated_bounds.size) - 1

    @property
    def n_control_intervals(self) -> int:
        return int(self.control_bounds.size) - 1


def _interval_bounds(sorted_scores: np.ndarray, cuts: np.ndarray, side: str) -> np.ndarray:
    if sorted_scores.size:
        if sorted_scores[0] < cuts[0]:
            raise CaliperError(
                f"{side} score {sorted_scores[0]:g} lies below the first cut {cuts[0]:g}; "
                "the cut list does not cover the data"
            )
        if sorted_scores[-1] >= cuts[-1]:
            raise CaliperError(
                f"{side} score {sorted_scores[-1]:g} is not below the last cut {cuts[-1]:g}; "
                "the cut list does not cover the data"
            )
    bounds = np.unique(np.searchsorted(sorted_scores, cuts, side="left"))
    bounds.flags.writeable = False
    return bounds


def build_interval_index(scores: ScoreSet, caliper: StepSumCaliper) -> IntervalIndex:
    """Locate each step interval's block of positions in one linear pass.

    Empty intervals are elided, so consecutive bounds always differ and every
    retained block holds scores from exactly one step interval of the caliper.
    """
    if not isinstance(caliper, StepSumCaliper):
        raise CaliperError("interval indexing requires a StepSumCaliper")
    return IntervalIndex(
        treated_bounds=_interval_bounds(
            scores.treated_scores, caliper.treated_cuts, "treated"
        ),
        control_bounds=_interval_bounds(
            scores.control_scores, caliper.control_cuts, "control"
        ),
    )


def match_one_to_one_piecewise(scores: ScoreSet, caliper: StepSumCaliper) -> MatchResult:
    """Maximum-cardinality one-to-one matching under a step-sum caliper.

    Keeps a cursor per step interval on each side. In every round the side
    with the smaller current score probes the first unused object of each of
    the other side's intervals (head-of-interval checks suffice because the
    caliper is constant within an interval and globally nondecreasing) and
    either matches one of them or discards its current object.
    """
    validate_caliper(caliper, scores)
    index = build_interval_index(scores, caliper)

    xs = scores.treated_scores.tolist()
    ys = scores.control_scores.tolist()
    K, L = len(xs), len(ys)
    I = index.treated_bounds.tolist()
    J = index.control_bounds.tolist()
    U, V = len(I), len(J)
    S = list(I)
    T = list(J)

    treated: list[int] = []
    control: list[int] = []
    dists: list[float] = []

    # i == S[u0] and j == T[v0] throughout: the overall first unused position
    # and the interval it belongs to; the last bound of each side is a
    # sentinel equal to K (resp. L) that terminates the walk
    i, j = I[0], J[0]
    u0 = v0 = 0

    def advance_treated() -> None:
        nonlocal i, u0
        S[u0] += 1
        i += 1
        if u0 + 1 < U and i == I[u0 + 1]:
            u1 = u0 + 1
            while u1 < U - 1 and S[u1] == I[u1 + 1]:
                u1 += 1
            u0 = u1
            i = S[u1]

    def advance_control() -> None:
        nonlocal j, v0
        T[v0] += 1
        j += 1
        if v0 + 1 < V and j == J[v0 + 1]:
            v1 = v0 + 1
            while v1 < V - 1 and T[v1] == J[v1 + 1]:
                v1 += 1
            v0 = v1
            j = T[v1]

    iterations = 0
    while i < K and j < L:
        iterations += 1
        x = xs[i]
        if x < ys[j]:
            matched = False
            for v in range(v0, V - 1):
                tv = T[v]
                if tv < J[v + 1]:
                    y = ys[tv]
                    d = abs(x - y)
                    if d <= caliper(x, y):
                        treated.append(i)
                        control.append(tv)
                        dists.append(d)
                        advance_treated()
                        if v0 == v:
                            advance_control()
                        else:
                            T[v] = tv + 1
                        matched = True
                        break
            if not matched:
                advance_treated()
        else:
            y = ys[j]
            matched = False
            for u in range(u0, U - 1):
                su = S[u]
                if su < I[u + 1]:
                    xv = xs[su]
                    d = abs(xv - y)
                    if d <= caliper(xv, y):
                        treated.append(su)
                        control.append(j)
                        dists.append(d)
                        advance_control()
                        if u0 == u:
                            advance_treated()
                        else:
                            S[u] = su + 1
                        matched = True
                        break
            if not matched:
                advance_control()
    return make_match_result(treated, control, dists, iterations)


def min_constant_caliper(
    scores: ScoreSet, target_fraction: float, iterations: int = 20
) -> float:
    """Smallest constant caliper reaching a target share of the possible pairs.

    ``target_fraction`` is interpreted as a share of min(K, L) - the largest
    pair count any caliper can reach - rounded up to whole pairs. Bisection
    over [0, score range] runs for ``iterations`` steps, so the final bracket
    is range * 2**-iterations wide; the returned value is the bracket's upper
    end and therefore always achieves the target. Returns 0.0 outright when
    the target is reachable with a zero-width caliper (exact ties) or when the
    target rounds to zero pairs.
    """
    if not (0.0 < target_fraction <= 1.0):
        raise InputValidationError(
            f"target_fraction must lie in (0, 1], got {target_fraction!r}"
        )
    if not isinstance(iterations, int) or isinstance(iterations, bool) or iterations < 1:
        raise InputValidationError(
            f"iterations must be a positive integer, got {iterations!r}"
        )
    limit = min(scores.n_treated, scores.n_control)
    # round() kills float dust like 0.1 * 30 == 3.0000000000000004 before ceil
    target = math.ceil(round(target_fraction * limit, 9))
    if target == 0:
        return 0.0

    def matched(width: float) -> int:
        return match_one_to_one(scores, ConstantCaliper(width)).pair_count

    if matched(0.0) >= target:
        return 0.0
    span = scores.score_range
    lo, hi = 0.0, span
    if matched(hi) < target:
        # unreachable for target <= min(K, L), kept as a hard guard
        raise InfeasibleTargetError(
            f"target of {target} pairs is not achievable even at caliper {hi:g}"
        )
    for _ in range(iterations):
        mid = (lo + hi) / 2.0
        if matched(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi
