"""Score-set preparation and caliper family tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calipermatch import (
    CaliperError,
    ConstantCaliper,
    FunctionCaliper,
    InputValidationError,
    SeparableLipschitzCaliper,
    StepSumCaliper,
    as_caliper,
    prepare_score_set,
    validate_caliper,
)

finite_floats = st.floats(
    min_value=-100, max_value=100, allow_nan=False, allow_infinity=False
)


class TestPrepareScoreSet:
    def test_empty(self):
        ss = prepare_score_set([], [])
        assert ss.n_treated == 0
        assert ss.n_control == 0
        assert ss.n_total == 0

    def test_two_element_sort(self):
        ss = prepare_score_set([0.3, 0.1], [0.2])
        assert ss.treated_scores.tolist() == [0.1, 0.3]
        assert ss.treated_perm.tolist() == [1, 0]
        assert ss.control_scores.tolist() == [0.2]
        assert ss.control_perm.tolist() == [0]

    def test_stable_ties_keep_input_order(self):
        ss = prepare_score_set([2.0, 1.0, 2.0, 1.0], [])
        assert ss.treated_perm.tolist() == [1, 3, 0, 2]

    def test_rejects_nan_naming_row(self):
        with pytest.raises(InputValidationError, match=r"treated\[2\]"):
            prepare_score_set([0.0, 1.0, float("nan")], [])
        with pytest.raises(InputValidationError, match=r"control\[0\]"):
            prepare_score_set([], [float("inf")])

    def test_arrays_are_readonly(self):
        ss = prepare_score_set([0.5], [0.25])
        with pytest.raises(ValueError):
            ss.treated_scores[0] = 1.0

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(finite_floats, max_size=60),
        st.lists(finite_floats, max_size=60),
    )
    def test_permutation_round_trip(self, treated, control):
        ss = prepare_score_set(treated, control)
        t = np.asarray(treated, dtype=float)
        c = np.asarray(control, dtype=float)
        assert ss.treated_scores.tolist() == sorted(treated)
        assert ss.control_scores.tolist() == sorted(control)
        assert np.array_equal(t[ss.treated_perm], ss.treated_scores)
        assert np.array_equal(c[ss.control_perm], ss.control_scores)
        assert sorted(ss.treated_perm.tolist()) == list(range(len(treated)))
        assert sorted(ss.control_perm.tolist()) == list(range(len(control)))


class TestCaliperEvaluation:
    def test_constant(self):
        cal = ConstantCaliper(0.02)
        assert cal(0.0, 1.0) == 0.02
        assert cal(-5.0, 17.3) == 0.02

    def test_stepsum_hand_values(self):
        cal = StepSumCaliper(
            treated_steps=[(-np.inf, 0.01), (0.5, 0.1)],
            control_steps=[(-np.inf, 0.0)],
        )
        assert cal(0.6, 0.3) == 0.1
        assert cal(0.5, 0.3) == 0.1  # right-open: threshold belongs to the piece
        assert cal(0.49, 0.3) == 0.01

    def test_stepsum_clamps_below_first_threshold(self):
        cal = StepSumCaliper(
            treated_steps=[(0.5, 0.1), (0.8, 0.2)],
            control_steps=[(0.0, 0.0)],
        )
        assert cal(0.1, 0.5) == 0.1
        assert cal(0.5, -3.0) == 0.1
        assert cal(0.9, 0.5) == 0.2

    def test_separable_hand_value(self):
        # g linear from 0.01 at x=0 to 0.51 at x=1 (slope 0.5), h == 0
        cal = SeparableLipschitzCaliper(
            treated_knots=[(0.0, 0.01), (1.0, 0.51)],
            control_knots=[(0.0, 0.0)],
        )
        assert cal(0.2, 0.7) == pytest.approx(0.11)
        # outside the knot range the nearest piece value applies
        assert cal(-1.0, 0.7) == pytest.approx(0.01)
        assert cal(2.0, 0.7) == pytest.approx(0.51)

    def test_function_caliper_passthrough(self):
        cal = FunctionCaliper(lambda x, y: 0.5 * (x + y))
        assert cal(0.2, 0.4) == pytest.approx(0.3)
        assert cal.checked is False

    def test_as_caliper_coercion(self):
        assert isinstance(as_caliper(0.25), ConstantCaliper)
        assert isinstance(as_caliper(lambda x, y: 1.0), FunctionCaliper)
        cal = ConstantCaliper(0.1)
        assert as_caliper(cal) is cal
        with pytest.raises(CaliperError):
            as_caliper("0.25")


class TestCaliperValidation:
    def test_negative_constant_rejected(self):
        with pytest.raises(CaliperError, match="nonnegative"):
            validate_caliper(ConstantCaliper(-0.01))

    def test_slope_above_one_rejected_naming_piece(self):
        cal = SeparableLipschitzCaliper(
            treated_knots=[(0.0, 0.0), (0.5, 0.1), (1.0, 1.1)],
            control_knots=[(0.0, 0.0)],
        )
        with pytest.raises(CaliperError, match="treated-side piece 1"):
            validate_caliper(cal)

    def test_decreasing_step_table_rejected(self):
        cal = StepSumCaliper(
            treated_steps=[(0.0, 0.2), (0.5, 0.1)],
            control_steps=[(0.0, 0.0)],
        )
        with pytest.raises(CaliperError, match="treated-side step table decreases"):
            validate_caliper(cal)

    def test_negative_step_rejected(self):
        cal = StepSumCaliper(
            treated_steps=[(0.0, -0.1), (0.5, 0.1)],
            control_steps=[(0.0, 0.0)],
        )
        with pytest.raises(CaliperError, match="starts negative"):
            validate_caliper(cal)

    def test_stepsum_certified_for_piecewise(self):
        cal = StepSumCaliper(
            treated_steps=[(-np.inf, 0.01), (0.5, 0.1)],
            control_steps=[(-np.inf, 0.0)],
        )
        report = validate_caliper(cal)
        assert report.certified_piecewise is True
        assert report.certified_lipschitz is False

    def test_constant_certified_for_lipschitz(self):
        report = validate_caliper(ConstantCaliper(0.0))
        assert report.certified_lipschitz is True

    def test_negative_on_data_rejected_naming_pair(self):
        # g + h dips below zero exactly at the smallest knot values
        cal = SeparableLipschitzCaliper(
            treated_knots=[(0.0, -0.2), (1.0, 0.3)],
            control_knots=[(0.0, 0.1)],
        )
        scores = prepare_score_set([0.1, 0.9], [0.5])
        with pytest.raises(CaliperError, match="negative .* at the data pair"):
            validate_caliper(cal, scores)

    def test_min_on_data_reported(self):
        cal = SeparableLipschitzCaliper(
            treated_knots=[(0.0, 0.1), (1.0, 0.4)],
            control_knots=[(0.0, 0.05)],
        )
        scores = prepare_score_set([0.0, 1.0], [2.0])
        report = validate_caliper(cal, scores)
        assert report.min_on_data == pytest.approx(0.15)

    def test_malformed_tables_rejected_at_construction(self):
        with pytest.raises(CaliperError, match="strictly increasing"):
            SeparableLipschitzCaliper(
                treated_knots=[(0.5, 0.0), (0.5, 0.1)], control_knots=[(0.0, 0.0)]
            )
        with pytest.raises(CaliperError, match="at least one entry"):
            StepSumCaliper(treated_steps=[], control_steps=[(0.0, 0.0)])
        with pytest.raises(CaliperError, match="non-finite"):
            SeparableLipschitzCaliper(
                treated_knots=[(0.0, float("nan"))], control_knots=[(0.0, 0.0)]
            )


def _random_lipschitz_component(rng, n_knots):
    """Piecewise-linear table with slope magnitude <= 1 on every piece."""
    xs = np.unique(np.sort(rng.uniform(-2, 2, n_knots)))
    slopes = rng.uniform(-1, 1, xs.size - 1)
    base = rng.uniform(0, 1)
    vs = base + np.concatenate(([0.0], np.cumsum(slopes * np.diff(xs))))
    return list(zip(xs.tolist(), vs.tolist()))


class TestCaliperShapeProperties:
    def test_separable_is_lipschitz_on_samples(self):
        rng = np.random.default_rng(7)
        for trial in range(50):
            cal = SeparableLipschitzCaliper(
                treated_knots=_random_lipschitz_component(rng, int(rng.integers(1, 6))),
                control_knots=_random_lipschitz_component(rng, int(rng.integers(1, 6))),
            )
            validate_caliper(cal)
            x, y = rng.uniform(-3, 3, 2)
            for t in rng.uniform(-2, 2, 8):
                assert abs(cal(x, y) - cal(x + t, y)) <= abs(t) + 1e-12
                assert abs(cal(x, y) - cal(x, y + t)) <= abs(t) + 1e-12

    def test_stepsum_never_shrinks_faster_than_scores_move(self):
        rng = np.random.default_rng(8)
        for trial in range(50):
            def table():
                thresholds = np.sort(rng.uniform(-1, 2, int(rng.integers(1, 5))))
                values = np.cumsum(rng.uniform(0, 0.3, thresholds.size))
                return list(zip(thresholds.tolist(), values.tolist()))

            cal = StepSumCaliper(treated_steps=table(), control_steps=table())
            validate_caliper(cal)
            x, y = rng.uniform(-2, 3, 2)
            for t in rng.uniform(1e-6, 2, 8):
                assert cal(x, y + t) >= cal(x, y) - t
                assert cal(x + t, y) >= cal(x, y) - t
