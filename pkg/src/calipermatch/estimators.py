"""Scikit-learn style wrappers so the matchers drop into ML pipelines.

Each estimator is fit on a score vector ``X`` (shape (n,) or (n, 1)) and a
group label vector ``y`` marking which rows are treated. Fitting computes the
matching; the fitted attributes expose the pairs in the caller's row order,
and ``transform`` filters any same-length array down to the matched rows, so
a matcher composes with the usual fit/transform tooling (``get_params``,
``set_params`` and ``clone`` behave as for any scikit-learn estimator).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .calipers import StepSumCaliper, as_caliper
from .core import InputValidationError, as_finite_array, prepare_score_set
from .maximal import match_one_to_n, match_one_to_one, match_one_to_one_piecewise
from .nearest import (
    complete_match_max_cost,
    complete_match_min_cost,
    nn_match_sorted,
    nn_match_tree,
    rematch_by_rank,
)

__all__ = [
    "check_scores_groups",
    "MaximalMatcher",
    "NearestNeighborMatcher",
    "CompleteMatcher",
]

_TREATED_LABELS = frozenset({"treated", "t", "1", "true"})
_CONTROL_LABELS = frozenset({"control", "c", "0", "false"})


def check_scores_groups(X, y) -> tuple[np.ndarray, np.ndarray]:
    """Validate scores and group labels; returns (scores, treated mask).

    ``y`` may be boolean, 0/1 integers, or the strings "treated"/"control"
    (case-insensitive).
    """
    scores = as_finite_array(X, "scores")
    labels = np.asarray(y)
    if labels.ndim != 1:
        raise InputValidationError(
            f"group labels must be one-dimensional, got shape {labels.shape}"
        )
    if labels.size != scores.size:
        raise InputValidationError(
            f"scores and group labels differ in length: {scores.size} vs {labels.size}"
        )
    if labels.dtype == bool:
        mask = labels
    elif np.issubdtype(labels.dtype, np.number):
        values = set(np.unique(labels).tolist())
        if not values <= {0, 1}:
            raise InputValidationError(
                f"numeric group labels must be 0 (control) or 1 (treated), "
                f"got {sorted(values)}"
            )
        mask = labels.astype(bool)
    else:
        mask = np.empty(labels.size, dtype=bool)
        for pos, raw in enumerate(labels.tolist()):
            token = str(raw).strip().lower()
            if token in _TREATED_LABELS:
                mask[pos] = True
            elif token in _CONTROL_LABELS:
                mask[pos] = False
            else:
                raise InputValidationError(
                    f"group label at row {pos} is neither treated nor control: {raw!r}"
                )
    return scores, mask


class _BaseMatcher(BaseEstimator):
    """Shared fit/transform plumbing; subclasses implement _match."""

    def fit(self, X, y):
        """Compute the matching for scores X and group labels y.

        Sets ``score_set_``, ``result_`` (sorted-position indices),
        ``pairs_`` (original row positions, shape (M, 2)), ``distances_``
        and ``matched_mask_``.
        """
        scores, treated = check_scores_groups(X, y)
        score_set = prepare_score_set(scores[treated], scores[~treated])
        result = self._match(score_set)

        treated_rows = np.flatnonzero(treated)
        control_rows = np.flatnonzero(~treated)
        t_rows = treated_rows[score_set.treated_perm[result.treated_indices]]
        c_rows = control_rows[score_set.control_perm[result.control_indices]]
        pairs = np.column_stack([t_rows, c_rows]) if t_rows.size else np.empty(
            (0, 2), dtype=np.intp
        )
        pairs.flags.writeable = False
        mask = np.zeros(scores.size, dtype=bool)
        mask[t_rows] = True
        mask[c_rows] = True
        mask.flags.writeable = False

        self.score_set_ = score_set
        self.result_ = result
        self.pairs_ = pairs
        self.distances_ = result.distances
        self.matched_mask_ = mask
        self.n_samples_in_ = int(scores.size)
        return self

    def transform(self, X):
        """Select the matched rows of a same-length array."""
        if not hasattr(self, "matched_mask_"):
            raise NotFittedError(
                f"this {type(self).__name__} instance is not fitted yet"
            )
        arr = np.asarray(X)
        if arr.shape[0] != self.n_samples_in_:
            raise InputValidationError(
                f"transform expects {self.n_samples_in_} rows, got {arr.shape[0]}"
            )
        return arr[self.matched_mask_]

    def fit_transform(self, X, y):
        return self.fit(X, y).transform(X)

    def _match(self, score_set):  # pragma: no cover
        raise NotImplementedError


class MaximalMatcher(_BaseMatcher):
    """Maximum-cardinality caliper matching as an estimator.

    Parameters
    ----------
    caliper : float or Caliper, default 0.02
        Constant width, or any caliper object; step-sum calipers route to the
        interval matcher automatically.
    n_controls : int, default 1
        Maximum controls per treated object. Values above 1 require a
        Lipschitz caliper (constant or separable).
    """

    def __init__(self, caliper=0.02, n_controls=1):
        self.caliper = caliper
        self.n_controls = n_controls

    def _match(self, score_set):
        caliper = as_caliper(self.caliper)
        if isinstance(caliper, StepSumCaliper):
            if self.n_controls != 1:
                raise InputValidationError(
                    "step-sum calipers support one control per treated object"
                )
            return match_one_to_one_piecewise(score_set, caliper)
        if self.n_controls == 1:
            return match_one_to_one(score_set, caliper)
        return match_one_to_n(score_set, caliper, self.n_controls)


class NearestNeighborMatcher(_BaseMatcher):
    """Greedy nearest-neighbor matching without replacement as an estimator.

    Parameters
    ----------
    caliper : float or Caliper, default 0.02
    order : {"sorted", "given", "random"}, default "sorted"
        Order in which treated rows claim their nearest control.
    method : {"auto", "sorted", "tree"}, default "auto"
        Implementation choice; "sorted" is the O(N) list scan (sorted order
        only), "tree" the O(N log N) search tree, "auto" picks by order.
    rematch : bool, default False
        Re-pair the matched rows by score rank afterwards (never increases
        total or maximum distance, keeps the caliper for Lipschitz calipers).
    random_state : int or None
        Seed for order="random".
    """

    def __init__(
        self, caliper=0.02, order="sorted", method="auto", rematch=False,
        random_state=None,
    ):
        self.caliper = caliper
        self.order = order
        self.method = method
        self.rematch = rematch
        self.random_state = random_state

    def _match(self, score_set):
        caliper = as_caliper(self.caliper)
        method = self.method
        if method == "auto":
            method = "sorted" if self.order == "sorted" else "tree"
        if method == "sorted":
            if self.order != "sorted":
                raise InputValidationError(
                    'method="sorted" supports only order="sorted"'
                )
            result = nn_match_sorted(score_set, caliper)
        elif method == "tree":
            result = nn_match_tree(
                score_set, caliper, order=self.order, random_state=self.random_state
            )
        else:
            raise InputValidationError(
                f'method must be "auto", "sorted" or "tree", got {self.method!r}'
            )
        if self.rematch:
            result = rematch_by_rank(result, score_set, caliper)
        return result


class CompleteMatcher(_BaseMatcher):
    """Complete (perfect) matching of equal-size groups as an estimator.

    With ``maximize_cost=False`` pairs scores rank-to-rank, which minimizes
    every convex pair cost and the maximum within-pair distance; with
    ``maximize_cost=True`` pairs ranks in opposite order, maximizing those
    costs. Requires equally many treated and control rows.
    """

    def __init__(self, maximize_cost=False):
        self.maximize_cost = maximize_cost

    def _match(self, score_set):
        if self.maximize_cost:
            return complete_match_max_cost(score_set)
        return complete_match_min_cost(score_set)
