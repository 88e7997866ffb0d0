"""Unit tests for volatility tables and the piecewise log-log fit."""

import numpy as np
import pytest

import rankdist as rd
from rankdist.core import GroupedShares


TARGET_2012 = GroupedShares(
    brackets=((0, 0.01), (0.01, 0.1), (0.1, 0.5), (0.5, 1), (1, 10),
              (10, 100)),
    shares=np.array([0.111, 0.108, 0.124, 0.072, 0.357, 0.228]))


class TestDefaultVolatilityTable:
    def test_low_constant(self):
        table = rd.default_volatility_table()
        assert np.all(table.sigma_low == 0.283)

    def test_high_values(self):
        table = rd.default_volatility_table()
        np.testing.assert_array_equal(table.sigma_high,
                                      [0.286, 0.294, 0.316, 0.392, 1.662])
        assert table.brackets == ((0, 10), (10, 20), (20, 40), (40, 60),
                                  (60, 100))


class TestVolatilityFromComponents:
    def test_investment_only(self):
        table = rd.volatility_from_components(0.2, np.zeros(5))
        np.testing.assert_allclose(table.sigma_high, np.sqrt(2) * 0.2)
        np.testing.assert_allclose(table.sigma_low, np.sqrt(2) * 0.2)

    def test_zero_inputs(self):
        with pytest.raises(rd.NonPositiveSigmaError):
            rd.volatility_from_components(0.0, np.zeros(5))

    def test_backed_out_bottom_bracket(self):
        # The labor component that reproduces a combined 1.662.
        labor = np.array([0.0, 0.0, 0.0, 0.0, 1.1582])
        table = rd.volatility_from_components(0.2, labor)
        assert table.sigma_high[-1] == pytest.approx(1.662, abs=5e-4)

    def test_negative_rejected(self):
        with pytest.raises(rd.NegativeInputError):
            rd.volatility_from_components(-0.1, np.zeros(5))


class TestExpandSigma:
    def test_low_variant_constant(self):
        sigma = rd.expand_sigma(rd.default_volatility_table(), 100, "low")
        assert sigma.shape == (99,)
        assert np.all(sigma == 0.283)

    def test_high_variant_bracket_lookup(self):
        sigma = rd.expand_sigma(rd.default_volatility_table(), 10, "high")
        # Gap k takes the bracket of its upper rank k.
        assert sigma[0] == 0.286   # rank 1 in (0, 10]%
        assert sigma[8] == 1.662   # rank 9 in (60, 100)%

    def test_piecewise_constant_boundaries(self):
        n = 1000
        sigma = rd.expand_sigma(rd.default_volatility_table(), n, "high")
        assert sigma[99] == 0.286    # gap 100: upper rank 100 = top 10%
        assert sigma[100] == 0.294   # gap 101 enters the next bracket


class TestFitPiecewisePareto:
    def test_uniform_target_zero_slopes(self):
        target = GroupedShares(brackets=((0, 50), (50, 100)),
                               shares=np.array([0.5, 0.5]))
        shares, fit = rd.fit_piecewise_pareto(target, 1000, (10.0, 50.0))
        assert fit.slopes == (0.0, 0.0, 0.0)
        assert fit.fit_error == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(shares.shares, 1e-3)

    def test_recovers_single_pareto(self):
        # Aggregate an exact power law into brackets, then fit: all three
        # segments should recover the generating slope.
        n = 10000
        slope = -0.8
        k = np.arange(1, n + 1)
        raw = k ** slope
        full = raw / raw.sum()
        brackets = ((0, 0.1), (0.1, 1), (1, 10), (10, 100))
        target = rd.group_shares(rd.make_ranked_shares(full), brackets)
        shares, fit = rd.fit_piecewise_pareto(target, n, (0.1, 10.0))
        assert fit.fit_error < 1e-4
        for s in fit.slopes:
            assert s == pytest.approx(slope, abs=1e-3)

    def test_infeasible_target(self):
        target = GroupedShares(brackets=((0, 50), (50, 100)),
                               shares=np.array([0.3, 0.7]))
        with pytest.raises(rd.InfeasibleTargetError):
            rd.fit_piecewise_pareto(target, 1000, (10.0, 50.0))

    def test_2012_target_small_n(self):
        # Same shape as the headline calibration but desk-sized.
        # The first segment degenerates to one gap at this scale, so the
        # achievable error is a little above the full-scale calibration's.
        shares, fit = rd.fit_piecewise_pareto(TARGET_2012, 10**4)
        assert fit.fit_error < 0.02
        assert all(s < 0 for s in fit.slopes)
        assert np.all(np.diff(shares.shares) < 0)
        grouped = rd.group_shares(shares, TARGET_2012.brackets)
        assert np.abs(grouped.shares - TARGET_2012.shares).sum() == \
            pytest.approx(fit.fit_error, rel=1e-9)


class TestCalibrate:
    def test_stable_by_construction(self):
        params = rd.calibrate(TARGET_2012, rd.default_volatility_table(),
                              "low", 10**4)
        report = rd.check_stability(params.alpha)
        assert report.stable

    def test_round_trip_fixed_point(self):
        params = rd.calibrate(TARGET_2012, rd.default_volatility_table(),
                              "high", 10**4)
        shares, fit = rd.fit_piecewise_pareto(TARGET_2012, 10**4)
        resolved = rd.shares_from_gaps(rd.stable_gaps(params))
        np.testing.assert_allclose(resolved.shares, shares.shares, rtol=1e-9)
