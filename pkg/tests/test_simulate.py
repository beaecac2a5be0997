"""Simulation harness tests: determinism, CDF emission, per-replication laws."""

import io

import numpy as np
import pytest

from calipermatch import (
    InputValidationError,
    SimConfig,
    emit_cdf,
    run_simulation,
)


def small_config(**overrides):
    base = dict(
        group_size=40,
        caliper_maximal=0.02,
        caliper_greedy=0.02,
        replications=50,
        seed=424242,
    )
    base.update(overrides)
    return SimConfig(**base)


class TestRunSimulation:
    def test_single_replication_bit_identical(self):
        cfg = small_config(replications=1)
        a = run_simulation(cfg)
        b = run_simulation(cfg)
        for name in ("maximal", "greedy", "greedy_rematched"):
            sa, sb = a.algorithm(name), b.algorithm(name)
            assert sa.mean_pairs == sb.mean_pairs
            assert sa.mean_max_distance == sb.mean_max_distance
            assert sa.mean_avg_distance == sb.mean_avg_distance
            assert np.array_equal(sa.cdf_pairs, sb.cdf_pairs)

    def test_different_seeds_differ(self):
        a = run_simulation(small_config(seed=1))
        b = run_simulation(small_config(seed=2))
        assert not np.array_equal(a.maximal.cdf_pairs, b.maximal.cdf_pairs)

    def test_maximal_dominates_greedy_quantilewise(self):
        # same caliper on both: the maximal matcher can never be beaten, so
        # every quantile of its pair count dominates greedy's
        summary = run_simulation(small_config())
        assert summary.maximal.mean_pairs >= summary.greedy.mean_pairs
        assert (summary.maximal.cdf_pairs >= summary.greedy.cdf_pairs).all()

    def test_rematch_never_worse_and_same_counts(self):
        summary = run_simulation(small_config())
        assert np.array_equal(
            summary.greedy.cdf_pairs, summary.greedy_rematched.cdf_pairs
        )
        assert summary.greedy_rematched.mean_max_distance <= (
            summary.greedy.mean_max_distance + 1e-12
        )
        assert summary.greedy_rematched.mean_avg_distance <= (
            summary.greedy.mean_avg_distance + 1e-12
        )

    def test_distances_bounded_by_calipers(self):
        summary = run_simulation(
            small_config(caliper_maximal=0.015, caliper_greedy=0.03)
        )
        assert summary.maximal.cdf_max_distance[-1] <= 0.015
        assert summary.greedy.cdf_max_distance[-1] <= 0.03
        assert summary.greedy_rematched.cdf_max_distance[-1] <= 0.03

    def test_cdf_arrays_sorted_with_length_replications(self):
        summary = run_simulation(small_config(replications=17))
        for name in ("maximal", "greedy", "greedy_rematched"):
            stats = summary.algorithm(name)
            for arr in (stats.cdf_pairs, stats.cdf_max_distance, stats.cdf_avg_distance):
                assert arr.size == 17
                assert (np.diff(arr) >= 0).all()

    def test_config_validation(self):
        with pytest.raises(InputValidationError):
            run_simulation(small_config(group_size=0))
        with pytest.raises(InputValidationError):
            run_simulation(small_config(replications=0))
        with pytest.raises(InputValidationError):
            run_simulation(small_config(caliper_maximal=-0.1))
        with pytest.raises(InputValidationError):
            run_simulation(small_config(greedy_order="descending"))

    def test_sorted_and_random_orders_run(self):
        for order in ("sorted", "random"):
            summary = run_simulation(
                small_config(replications=5, greedy_order=order)
            )
            assert summary.greedy.cdf_pairs.size == 5


class TestEmitCdf:
    def test_two_point_cdf_rows(self):
        summary = run_simulation(small_config(replications=2))
        sink = io.StringIO()
        emit_cdf(summary, "pairs", sink)
        lines = sink.getvalue().strip().splitlines()
        assert lines[0] == "algorithm,value,cumulative_fraction"
        maximal_rows = [l for l in lines[1:] if l.startswith("maximal,")]
        assert len(maximal_rows) == 2
        v1, f1 = maximal_rows[0].split(",")[1:]
        v2, f2 = maximal_rows[1].split(",")[1:]
        assert float(f1) == 0.5
        assert float(f2) == 1.0
        assert float(v1) <= float(v2)

    def test_last_fraction_is_one_for_every_algorithm(self):
        summary = run_simulation(small_config(replications=7))
        sink = io.StringIO()
        emit_cdf(summary, "avg_distance", sink)
        rows = [l.split(",") for l in sink.getvalue().strip().splitlines()[1:]]
        last = {}
        for name, value, fraction in rows:
            last[name] = float(fraction)
        assert set(last) == {"maximal", "greedy", "greedy_rematched"}
        assert all(f == 1.0 for f in last.values())

    def test_unknown_statistic_rejected(self):
        summary = run_simulation(small_config(replications=2))
        with pytest.raises(InputValidationError, match="unknown statistic"):
            emit_cdf(summary, "median_distance", io.StringIO())

    def test_writes_to_path(self, tmp_path):
        summary = run_simulation(small_config(replications=3))
        path = tmp_path / "cdf.csv"
        emit_cdf(summary, "max_distance", path)
        content = path.read_text()
        assert content.startswith("algorithm,value,cumulative_fraction")
        emit_cdf(summary, "max_distance", tmp_path / "cdf2.csv")
        assert (tmp_path / "cdf2.csv").read_text() == content
