"""
Tests for epsilon sweeps and the exponent fit.
"""

import math

import pytest

from nekholab.errors import DomainError
from nekholab.sim.sweep import (
    RowStatus,
    SweepResult,
    SweepRow,
    fit_exponent,
    parse_synthetic,
    summarize,
    sweep,
    synthetic_sweep,
    validate_eps_grid,
)


def _rows(eps, times, T_max):
    return [SweepRow(eps, seed, T, T >= T_max, 0.01, 0) for seed, T in enumerate(times)]


@pytest.mark.unit
class TestGrid:
    """Test suite for epsilon grid validation."""

    def test_valid(self):
        assert validate_eps_grid([0.1, 0.01, 0.001]) == [0.1, 0.01, 0.001]

    @pytest.mark.parametrize("grid", [[], [0.1, 0.0], [0.01, 0.1], [0.1, 0.1]])
    def test_invalid(self, grid):
        with pytest.raises(DomainError):
            validate_eps_grid(grid)


@pytest.mark.unit
class TestSynthetic:
    """Test suite for the analytic stability-time table."""

    def test_recovers_exponent(self):
        result = synthetic_sweep(0.25)
        assert result.fit is not None
        assert result.fit.a_estimate == pytest.approx(0.25, abs=1e-9)
        assert result.fit.intercept == pytest.approx(0.0, abs=1e-9)
        assert result.fit.residual < 1e-9
        assert result.fit.points_used == 7
        assert not result.fit.poor_fit

    def test_constant_factor_moves_intercept(self):
        result = synthetic_sweep(0.5, [0.1, 0.01, 0.001], c=2.0)
        assert result.fit.a_estimate == pytest.approx(0.5)
        assert result.fit.intercept == pytest.approx(math.log(2.0))

    def test_censoring_drops_points(self):
        """exp(eps^-1/4) exceeds exp(5) for eps <= 1.6e-3."""
        result = synthetic_sweep(0.25, T_max=math.exp(5.0))
        assert result.fit.points_used == 4
        assert result.censored_rows == 3
        assert result.fit.a_estimate == pytest.approx(0.25)

    def test_too_few_points(self):
        result = synthetic_sweep(0.25, T_max=math.exp(3.0))
        assert result.fit is None
        assert "at least 3" in result.fit_note

    def test_invalid_exponent(self):
        with pytest.raises(DomainError):
            synthetic_sweep(0.0)

    def test_parse(self):
        assert parse_synthetic("a=0.25") == 0.25
        assert parse_synthetic(" a = 0.5") == 0.5
        for text in ["b=0.25", "0.25", "a=x"]:
            with pytest.raises(DomainError):
                parse_synthetic(text)


@pytest.mark.unit
class TestSummaries:
    """Test suite for per-epsilon medians."""

    def test_median_not_censored(self):
        rows = _rows(0.1, [5.0, 6.0, 10.0], 10.0)
        (summary,) = summarize(rows, [0.1], 10.0)
        assert summary.median_T == 6.0
        assert not summary.censored
        assert summary.rows_censored == 1

    def test_median_censored(self):
        """A censored median censors the epsilon even if some rows stopped."""
        rows = _rows(0.1, [5.0, 10.0, 10.0], 10.0)
        (summary,) = summarize(rows, [0.1], 10.0)
        assert summary.censored

    def test_failed_rows_excluded(self):
        rows = _rows(0.1, [4.0], 10.0) + [
            SweepRow(0.1, 9, math.nan, False, math.nan, 0, status=RowStatus.FAILED)
        ]
        (summary,) = summarize(rows, [0.1], 10.0)
        assert summary.median_T == 4.0
        assert summary.rows_failed == 1

    def test_constant_times_are_degenerate(self):
        grid = [0.1, 0.01, 0.001]
        rows = [r for eps in grid for r in _rows(eps, [5.0], 10.0)]
        result = SweepResult(rows, summarize(rows, grid, 10.0), rho=0.01, T_max=10.0)
        with pytest.raises(DomainError):
            fit_exponent(result)


@pytest.mark.integration
class TestSweep:
    """Test suite for integrated sweeps."""

    def test_rows_ordered(self, pendulum_spec, midpoint_config):
        result = sweep(pendulum_spec, [1e-2, 5e-3], 0.005, 20.0, midpoint_config, [0, 1])
        keys = [(r.epsilon, r.seed) for r in result.rows]
        assert keys == [(1e-2, 0), (1e-2, 1), (5e-3, 0), (5e-3, 1)]
        assert all(r.status is RowStatus.OK for r in result.rows)
        assert all(not r.censored and 0 < r.T < 20.0 for r in result.rows)
        assert len(result.summaries) == 2
        assert result.fit is None

    def test_deterministic(self, pendulum_spec, midpoint_config):
        a = sweep(pendulum_spec, [1e-2], 0.005, 10.0, midpoint_config, [3])
        b = sweep(pendulum_spec, [1e-2], 0.005, 10.0, midpoint_config, [3])
        assert a.digest() == b.digest()

    @pytest.mark.parametrize("kwargs", [
        {"seeds": [1, 1]},
        {"seeds": []},
        {"rho": 0.6},
        {"T_max": 0.0},
        {"workers": 0},
    ])
    def test_invalid_arguments(self, pendulum_spec, midpoint_config, kwargs):
        args = dict(eps_list=[1e-2], rho=0.005, T_max=1.0, cfg=midpoint_config, seeds=[0])
        args.update(kwargs)
        with pytest.raises(DomainError):
            sweep(pendulum_spec, **args)

    @pytest.mark.slow
    def test_pool_matches_serial(self, pendulum_spec, midpoint_config):
        args = ([1e-2, 5e-3], 0.005, 10.0, midpoint_config, [0, 1, 2])
        serial = sweep(pendulum_spec, *args, workers=1)
        pooled = sweep(pendulum_spec, *args, workers=2)
        assert serial.digest() == pooled.digest()
