"""Shared domain types: validated score sets, match results, error hierarchy.

Everything here is immutable after construction (arrays are made read-only),
so score sets and results can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "MatchingError",
    "InputValidationError",
    "CaliperError",
    "GroupSizeError",
    "InfeasibleTargetError",
    "OracleSizeError",
    "ScoreSet",
    "MatchResult",
    "prepare_score_set",
    "as_finite_array",
]


class MatchingError(Exception):
    """Base class for all errors raised by calipermatch."""


class InputValidationError(MatchingError, ValueError):
    """Input data or parameters failed validation."""


class CaliperError(InputValidationError):
    """A caliper description is structurally invalid or unusable on the data."""


class GroupSizeError(InputValidationError):
    """An operation requiring equal group sizes received K != L."""


class InfeasibleTargetError(MatchingError):
    """A target pair count cannot be reached at any caliper width."""


class OracleSizeError(MatchingError):
    """A brute-force oracle was asked to exceed its size guard."""


def as_finite_array(values, name: str) -> np.ndarray:
    """Coerce to a 1-d float array, rejecting non-finite entries by position.

    Column vectors of shape (n, 1) are accepted and flattened so estimator-style
    inputs work unchanged.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise InputValidationError(
            f"{name} must be one-dimensional, got shape {arr.shape}"
        )
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise InputValidationError(
            f"{name}[{bad[0]}] is not finite ({arr[bad[0]]!r})"
        )
    return arr


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ScoreSet:
    """Treated and control scores sorted ascending, with maps back to input order.

    ``treated_perm[k]`` is the position in the original treated input of the
    k-th smallest treated score (stable, so tied scores keep input order);
    hence ``treated_input[treated_perm] == treated_scores``. Same for controls.
    All matching functions index into the sorted arrays; callers needing the
    original rows translate through the permutations.
    """

    treated_scores: np.ndarray
    control_scores: np.ndarray
    treated_perm: np.ndarray
    control_perm: np.ndarray

    @property
    def n_treated(self) -> int:
        return int(self.treated_scores.size)

    @property
    def n_control(self) -> int:
        return int(self.control_scores.size)

    @property
    def n_total(self) -> int:
        return self.n_treated + self.n_control

    @property
    def score_range(self) -> float:
        """max - min over both groups pooled; 0.0 when either view is empty."""
        if self.n_total == 0:
            return 0.0
        lo = min(
            float(self.treated_scores[0]) if self.n_treated else np.inf,
            float(self.control_scores[0]) if self.n_control else np.inf,
        )
        hi = max(
            float(self.treated_scores[-1]) if self.n_treated else -np.inf,
            float(self.control_scores[-1]) if self.n_control else -np.inf,
        )
        return hi - lo


def prepare_score_set(treated, control) -> ScoreSet:
    """Sort both groups ascending (stable sort) and remember the permutations."""
    t = as_finite_array(treated, "treated")
    c = as_finite_array(control, "control")
    t_perm = np.argsort(t, kind="stable")
    c_perm = np.argsort(c, kind="stable")
    return ScoreSet(
        treated_scores=_readonly(t[t_perm]),
        control_scores=_readonly(c[c_perm]),
        treated_perm=_readonly(t_perm),
        control_perm=_readonly(c_perm),
    )


@dataclass(frozen=True)
class MatchResult:
    """Matched pairs of sorted-array positions plus their score distances.

    ``treated_indices[m]`` / ``control_indices[m]`` index the sorted arrays of
    the ScoreSet the result was computed from. ``controls_per_treated`` is
    populated by one-to-n matching (treated position -> number of controls
    received) and is None for one-to-one results. ``loop_iterations`` counts
    main-loop passes of the producing algorithm, which the linear matchers
    keep at or below K + L.
    """

    treated_indices: np.ndarray
    control_indices: np.ndarray
    distances: np.ndarray
    loop_iterations: int
    controls_per_treated: Mapping[int, int] | None = None

    @property
    def pair_count(self) -> int:
        return int(self.treated_indices.size)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(
            zip(self.treated_indices.tolist(), self.control_indices.tolist())
        )

    @property
    def total_distance(self) -> float:
        return float(self.distances.sum()) if self.distances.size else 0.0

    @property
    def max_distance(self) -> float:
        return float(self.distances.max()) if self.distances.size else 0.0

    @property
    def mean_distance(self) -> float:
        return float(self.distances.mean()) if self.distances.size else 0.0


def make_match_result(
    treated_indices: Sequence[int],
    control_indices: Sequence[int],
    distances: Sequence[float],
    loop_iterations: int,
    controls_per_treated: Mapping[int, int] | None = None,
) -> MatchResult:
    """Freeze raw index/distance sequences into an immutable MatchResult."""
    return MatchResult(
        treated_indices=_readonly(np.asarray(treated_indices, dtype=np.intp)),
        control_indices=_readonly(np.asarray(control_indices, dtype=np.intp)),
        distances=_readonly(np.asarray(distances, dtype=float)),
        loop_iterations=int(loop_iterations),
        controls_per_treated=(
            dict(controls_per_treated) if controls_per_treated is not None else None
        ),
    )
