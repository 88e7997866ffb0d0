"""Unit tests for the closed-form solver, inversion, and stability analysis."""

import numpy as np
import pytest

import rankdist as rd


class TestKappaFromAlpha:
    def test_prefix_sums(self):
        np.testing.assert_allclose(
            rd.kappa_from_alpha([-0.02, 0.005, 0.015]), [0.04, 0.03])

    def test_zero_alpha_degenerate(self):
        np.testing.assert_allclose(rd.kappa_from_alpha([0.0, 0.0, 0.0]),
                                   [0.0, 0.0])

    def test_two_negative_prefixes(self):
        np.testing.assert_allclose(
            rd.kappa_from_alpha([-0.01, -0.01, 0.02]), [0.02, 0.04])

    def test_nonzero_sum_rejected(self):
        with pytest.raises(rd.BadAlphaSumError):
            rd.kappa_from_alpha([0.01, 0.01])


class TestStableGaps:
    def test_two_rank_hand_value(self):
        p = rd.make_rank_parameters([-0.05, 0.05], [0.3])
        g = rd.stable_gaps(p)
        assert g.gaps[0] == pytest.approx(0.45)

    def test_gibrat_gaps_inverse_in_rank(self):
        # Constant per-rank alpha below rank 1 keeps every prefix sum at
        # -0.02 * k, so gaps scale exactly as 1/k (pure power law).
        n = 50
        alpha = np.full(n, -0.02)
        alpha[-1] = 0.02 * (n - 1)
        p = rd.make_rank_parameters(alpha, np.full(n - 1, 0.3))
        g = rd.stable_gaps(p)
        k = np.arange(1, n)
        np.testing.assert_allclose(g.gaps * k, g.gaps[0], rtol=1e-12)

    def test_unstable_first_rank(self):
        p = rd.RankParameters(n=3, alpha=np.array([0.01, -0.02, 0.01]),
                              sigma=np.array([0.3, 0.3]))
        with pytest.raises(rd.UnstableError) as info:
            rd.stable_gaps(p)
        assert info.value.rank == 1

    def test_scale_invariance(self):
        # Doubling sigma multiplies gaps by exactly 4 (power-of-two scaling
        # is exact in floating point).
        p1 = rd.make_rank_parameters([-0.03, -0.01, 0.04], [0.2, 0.5])
        p2 = rd.make_rank_parameters([-0.03, -0.01, 0.04], [0.4, 1.0])
        np.testing.assert_array_equal(rd.stable_gaps(p2).gaps,
                                      4.0 * rd.stable_gaps(p1).gaps)


class TestSharesFromGaps:
    def test_powers_of_two(self):
        g = rd.StableGaps(n=3, gaps=np.array([np.log(2), np.log(2)]))
        np.testing.assert_allclose(rd.shares_from_gaps(g).shares,
                                   [4 / 7, 2 / 7, 1 / 7])

    def test_zero_gaps_uniform(self):
        g = rd.StableGaps(n=4, gaps=np.zeros(3))
        np.testing.assert_allclose(rd.shares_from_gaps(g).shares,
                                   np.full(4, 0.25))

    def test_two_rank_logistic(self):
        g = rd.StableGaps(n=2, gaps=np.array([0.45]))
        np.testing.assert_allclose(rd.shares_from_gaps(g).shares,
                                   [0.6106, 0.3894], atol=5e-5)


class TestAlphaFromShares:
    def test_hand_inversion(self):
        s = rd.make_ranked_shares([0.5, 0.3, 0.2])
        p = rd.alpha_from_shares(s, np.array([0.3, 0.3]))
        np.testing.assert_allclose(p.alpha, [-0.04404, -0.01145, 0.05549],
                                   atol=5e-5)
        assert p.alpha.sum() == 0.0  # exact by construction

    def test_round_trip(self):
        s = rd.make_ranked_shares([0.4, 0.25, 0.2, 0.15])
        p = rd.alpha_from_shares(s, np.array([0.3, 0.2, 0.4]))
        back = rd.shares_from_gaps(rd.stable_gaps(p))
        np.testing.assert_allclose(back.shares, s.shares, rtol=1e-12)

    def test_pareto_constant_interior_alpha(self):
        # Exact power-law shares with constant sigma give prefix sums
        # proportional to -k, i.e. constant per-rank alpha in the interior.
        n = 100
        k = np.arange(1, n + 1)
        raw = k ** -1.5
        s = rd.make_ranked_shares(raw / raw.sum())
        p = rd.alpha_from_shares(s, np.full(n - 1, 0.3))
        interior = p.alpha[1:n - 1]
        # d(prefix)/dk varies slowly: neighboring alphas agree to ~1/k^2.
        assert np.all(np.abs(np.diff(interior)) < np.abs(interior[:-1]) * 0.1)

    def test_tied_shares_rejected(self):
        s = rd.RankedShares(n=3, shares=np.array([0.4, 0.4, 0.2]))
        with pytest.raises(rd.TiedSharesError) as info:
            rd.alpha_from_shares(s, np.array([0.3, 0.3]))
        assert info.value.rank == 1

    def test_nonpositive_sigma_rejected(self):
        s = rd.make_ranked_shares([0.5, 0.3, 0.2])
        with pytest.raises(rd.NonPositiveSigmaError):
            rd.alpha_from_shares(s, np.array([0.3, -0.3]))


class TestCheckStability:
    def test_stable(self):
        report = rd.check_stability([-0.01, -0.01, 0.02])
        assert report.stable and report.first_violation is None

    def test_unstable_top_household(self):
        report = rd.check_stability([0.02, -0.01, -0.01])
        assert not report.stable
        assert report.first_violation == 1
        np.testing.assert_allclose(report.A, [0.02, 0.005, 0.0])
        assert report.m == 1 and report.unique_max

    def test_tie_takes_smallest_m(self):
        report = rd.check_stability([0.01, 0.01, -0.02])
        assert report.m == 1
        assert report.unique_max is False
        np.testing.assert_allclose(report.A, [0.01, 0.01, 0.0])

    def test_relaxed_sum_for_adjusted_rates(self):
        report = rd.check_stability([0.05, -0.01], require_zero_sum=False)
        assert not report.stable


class TestTopGroupStable:
    def test_two_household_divergent_group(self):
        # A_1 = 0.01, A_2 = 0.02 -> divergent subset of size 2; relative to
        # the group the rates become (-0.01, +0.01), one gap of 2.25.
        p = rd.RankParameters(n=4, alpha=np.array([0.01, 0.03, -0.02, -0.02]),
                              sigma=np.array([0.3, 0.3, 0.3]))
        report = rd.check_stability(p.alpha)
        assert report.m == 2
        limit = rd.top_group_stable(p, report.m)
        np.testing.assert_allclose(limit.shares, [0.9047, 0.0953], atol=5e-5)

    def test_single_household_group(self):
        p = rd.RankParameters(n=3, alpha=np.array([0.03, -0.02, -0.01]),
                              sigma=np.array([0.3, 0.3]))
        limit = rd.top_group_stable(p, 1)
        np.testing.assert_array_equal(limit.shares, [1.0])

    def test_stable_configuration_rejected(self):
        p = rd.make_rank_parameters([-0.01, -0.01, 0.02], [0.3, 0.3])
        with pytest.raises(rd.NotDivergentError):
            rd.top_group_stable(p, 2)

    def test_group_unstable(self):
        # Unstable overall, but the group's internal rates (alpha - mean)
        # start with a nonnegative prefix: no internal stable distribution.
        p = rd.RankParameters(n=3, alpha=np.array([0.05, 0.03, -0.08]),
                              sigma=np.array([0.3, 0.3]))
        with pytest.raises(rd.GroupUnstableError):
            rd.top_group_stable(p, 2)


class TestRoundTripProperty:
    def test_random_round_trips(self):
        rng = np.random.default_rng(12345)
        for n in (3, 10, 1000):
            for _ in range(5):
                gaps = rng.uniform(0.02, 0.7, n - 1)
                logs = np.concatenate([[0.0], -np.cumsum(gaps)])
                weights = np.exp(logs)
                s = rd.make_ranked_shares(weights / weights.sum())
                sigma = rng.uniform(0.05, 1.0, n - 1)
                p = rd.alpha_from_shares(s, sigma)
                back = rd.shares_from_gaps(rd.stable_gaps(p))
                np.testing.assert_allclose(back.shares, s.shares, rtol=1e-10)

    def test_near_tied_round_trips_looser(self):
        # Sorted uniforms contain near-ties; the round trip still holds to
        # a few parts in 1e9 despite the ill-conditioned inversion there.
        rng = np.random.default_rng(99)
        raw = np.sort(rng.random(1000) + 1e-3)[::-1]
        s = rd.make_ranked_shares(raw / raw.sum())
        p = rd.alpha_from_shares(s, rng.uniform(0.05, 1.0, 999))
        back = rd.shares_from_gaps(rd.stable_gaps(p))
        np.testing.assert_allclose(back.shares, s.shares, rtol=1e-7)
