"""Scikit-learn facade tests: params, cloning, fitting, row translation."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from calipermatch import (
    CompleteMatcher,
    GroupSizeError,
    InputValidationError,
    MaximalMatcher,
    NearestNeighborMatcher,
    StepSumCaliper,
)
from calipermatch.estimators import check_scores_groups


class TestCheckScoresGroups:
    def test_boolean_labels(self):
        scores, mask = check_scores_groups([0.1, 0.2], [True, False])
        assert mask.tolist() == [True, False]

    def test_numeric_labels(self):
        _, mask = check_scores_groups([0.1, 0.2, 0.3], [1, 0, 1])
        assert mask.tolist() == [True, False, True]

    def test_string_labels_case_insensitive(self):
        _, mask = check_scores_groups([0.1, 0.2], ["Treated", "CONTROL"])
        assert mask.tolist() == [True, False]

    def test_column_vector_scores(self):
        scores, _ = check_scores_groups(np.array([[0.1], [0.2]]), [1, 0])
        assert scores.tolist() == [0.1, 0.2]

    def test_bad_labels(self):
        with pytest.raises(InputValidationError, match="row 1"):
            check_scores_groups([0.1, 0.2], ["treated", "placebo"])
        with pytest.raises(InputValidationError, match="0 .* or 1"):
            check_scores_groups([0.1, 0.2], [1, 2])

    def test_length_mismatch(self):
        with pytest.raises(InputValidationError, match="differ in length"):
            check_scores_groups([0.1], [1, 0])


class TestMaximalMatcher:
    def test_fit_pairs_in_input_row_order(self):
        scores = [0.52, 0.10, 0.50, 0.90]
        groups = ["treated", "control", "control", "treated"]
        est = MaximalMatcher(caliper=0.05)
        est.fit(scores, groups)
        assert est.pairs_.tolist() == [[0, 2]]
        assert est.distances_.tolist() == pytest.approx([0.02])
        assert est.matched_mask_.tolist() == [True, False, True, False]

    def test_get_set_params_and_clone(self):
        est = MaximalMatcher(caliper=0.1, n_controls=2)
        assert est.get_params() == {"caliper": 0.1, "n_controls": 2}
        est.set_params(caliper=0.2)
        twin = clone(est)
        assert twin.get_params() == {"caliper": 0.2, "n_controls": 2}

    def test_one_to_n_repeats_treated_rows(self):
        est = MaximalMatcher(caliper=0.05, n_controls=2)
        est.fit([0.0, 0.01, 0.02, 0.03], [1, 0, 0, 0])
        assert est.pairs_.tolist() == [[0, 1], [0, 2]]

    def test_stepsum_routes_to_piecewise(self):
        caliper = StepSumCaliper(
            treated_steps=[(-np.inf, 0.01), (0.5, 0.1)],
            control_steps=[(-np.inf, 0.0)],
        )
        est = MaximalMatcher(caliper=caliper)
        est.fit([0.6, 0.52], [1, 0])
        assert est.pairs_.tolist() == [[0, 1]]
        with pytest.raises(InputValidationError, match="one control"):
            MaximalMatcher(caliper=caliper, n_controls=2).fit([0.6, 0.52], [1, 0])

    def test_transform_filters_matched_rows(self):
        est = MaximalMatcher(caliper=0.05)
        X = np.array([0.52, 0.10, 0.50, 0.90])
        est.fit(X, [1, 0, 0, 1])
        assert est.transform(X).tolist() == [0.52, 0.50]
        table = np.arange(8).reshape(4, 2)
        assert est.transform(table).tolist() == [[0, 1], [4, 5]]

    def test_transform_before_fit_raises(self):
        with pytest.raises(NotFittedError):
            MaximalMatcher().transform([0.1])

    def test_transform_length_checked(self):
        est = MaximalMatcher(caliper=0.05).fit([0.1, 0.12], [1, 0])
        with pytest.raises(InputValidationError, match="expects 2 rows"):
            est.transform([0.1, 0.12, 0.3])

    def test_fit_transform(self):
        est = MaximalMatcher(caliper=1.0)
        out = est.fit_transform([3.0, 1.0, 2.0], [1, 0, 1])
        assert sorted(out.tolist()) == [1.0, 2.0]


class TestNearestNeighborMatcher:
    def test_sorted_default(self):
        est = NearestNeighborMatcher(caliper=0.2)
        est.fit([0.5, 0.4, 0.55], [1, 0, 0])
        assert est.pairs_.tolist() == [[0, 2]]

    def test_tree_with_random_order_reproducible(self):
        rng = np.random.default_rng(31)
        scores = rng.random(30)
        groups = rng.integers(0, 2, 30)
        if groups.sum() in (0, 30):
            groups[0] = 1 - groups[0]
        a = NearestNeighborMatcher(caliper=0.1, order="random", random_state=5)
        b = NearestNeighborMatcher(caliper=0.1, order="random", random_state=5)
        assert (
            a.fit(scores, groups).pairs_.tolist()
            == b.fit(scores, groups).pairs_.tolist()
        )

    def test_rematch_flag_never_worse(self):
        rng = np.random.default_rng(32)
        scores = rng.random(60)
        groups = np.r_[np.ones(30, dtype=int), np.zeros(30, dtype=int)]
        plain = NearestNeighborMatcher(caliper=0.05).fit(scores, groups)
        rematched = NearestNeighborMatcher(caliper=0.05, rematch=True).fit(
            scores, groups
        )
        assert len(plain.pairs_) == len(rematched.pairs_)
        assert rematched.distances_.sum() <= plain.distances_.sum() + 1e-12

    def test_sorted_method_requires_sorted_order(self):
        est = NearestNeighborMatcher(method="sorted", order="given")
        with pytest.raises(InputValidationError, match="sorted"):
            est.fit([0.1, 0.2], [1, 0])

    def test_bad_method(self):
        with pytest.raises(InputValidationError, match="method"):
            NearestNeighborMatcher(method="hash").fit([0.1, 0.2], [1, 0])


class TestCompleteMatcher:
    def test_min_and_max_cost(self):
        scores = [0.0, 1.0, 0.4, 0.6]
        groups = [1, 1, 0, 0]
        best = CompleteMatcher().fit(scores, groups)
        assert best.pairs_.tolist() == [[0, 2], [1, 3]]
        worst = CompleteMatcher(maximize_cost=True).fit(scores, groups)
        assert worst.pairs_.tolist() == [[0, 3], [1, 2]]

    def test_unequal_groups_rejected(self):
        with pytest.raises(GroupSizeError):
            CompleteMatcher().fit([0.1, 0.2, 0.3], [1, 0, 0])

    def test_params_roundtrip(self):
        est = CompleteMatcher(maximize_cost=True)
        assert clone(est).get_params() == {"maximize_cost": True}
