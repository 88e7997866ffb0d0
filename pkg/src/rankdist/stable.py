"""Closed-form solver for rank-based wealth distributions.

Forward map (parameters -> stable distribution), inverse map (distribution +
volatilities -> relative growth rates), the prefix-sum stability test, and
the internal distribution of a divergent top group.

The central identity: in a stable configuration the time-averaged adjacent
log gap at rank k equals

    gap_k = sigma_k**2 / (-4 (alpha_1 + ... + alpha_k)) = sigma_k**2 / (2 kappa_k)

and stability holds exactly when every proper prefix sum of alpha is
strictly negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BadAlphaSumError,
    GroupUnstableError,
    NonPositiveSigmaError,
    NotDivergentError,
    RankedShares,
    RankModelError,
    RankParameters,
    StabilityReport,
    TiedSharesError,
    UnstableError,
    prefix_sum,
)

__all__ = [
    "StableGaps",
    "kappa_from_alpha",
    "stable_gaps",
    "gaps_from_prefix_sums",
    "shares_from_gaps",
    "alpha_from_shares",
    "check_stability",
    "top_group_stable",
]


@dataclass(frozen=True)
class StableGaps:
    """Expected adjacent log-share gaps of a stable configuration."""

    n: int
    gaps: np.ndarray

    def __post_init__(self):
        gaps = np.asarray(self.gaps, dtype=np.float64)
        if gaps.size != self.n - 1:
            raise RankModelError("gaps must have length n - 1")
        if np.any(~np.isfinite(gaps)) or np.any(gaps < 0):
            raise RankModelError("gaps must be finite and nonnegative")
        gaps.setflags(write=False)
        object.__setattr__(self, "gaps", gaps)


def kappa_from_alpha(alpha, *, tol: float = 1e-9) -> np.ndarray:
    """Reversion rates kappa_k = -2 (alpha_1 + ... + alpha_k), k = 1..n-1."""
    alpha = np.asarray(alpha, dtype=np.float64)
    scale = max(1.0, float(np.max(np.abs(alpha))) if alpha.size else 1.0)
    if abs(float(alpha.sum())) > tol * scale:
        raise BadAlphaSumError(f"alpha sums to {alpha.sum():.3e}, expected 0")
    return -2.0 * prefix_sum(alpha)[:-1]


def gaps_from_prefix_sums(sums: np.ndarray, sigma: np.ndarray) -> StableGaps:
    """Gaps from raw prefix sums of alpha (no sum-zero requirement).

    Used by the projection engine, where trend- or tax-adjusted growth rates
    carry nonzero aggregate drift by construction.  Raises
    :class:`UnstableError` at the first nonnegative prefix sum.
    """
    sums = np.asarray(sums, dtype=np.float64)
    if np.any(sums >= 0):
        raise UnstableError(int(np.argmax(sums >= 0)) + 1)
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.size != sums.size:
        raise RankModelError("sigma and prefix sums differ in length")
    return StableGaps(n=sums.size + 1, gaps=sigma ** 2 / (-4.0 * sums))


def stable_gaps(params: RankParameters) -> StableGaps:
    """Expected log gaps gap_k = sigma_k**2 / (2 kappa_k) of a stable system."""
    sums = prefix_sum(params.alpha)[:-1]
    return gaps_from_prefix_sums(sums, params.sigma)


def shares_from_gaps(gaps: StableGaps) -> RankedShares:
    """Exponentiate cumulative gaps into a normalized descending share vector."""
    logs = np.concatenate([[0.0], -prefix_sum(gaps.gaps)])
    weights = np.exp(logs - logs.max())
    return RankedShares(n=gaps.n, shares=weights / weights.sum())


def alpha_from_shares(shares: RankedShares, sigma) -> RankParameters:
    """Invert a strictly descending distribution into relative growth rates.

    Prefix sums satisfy sum_k = -sigma_k**2 / (4 gap_k); per-rank alpha by
    differencing, with the last element defined by negation so the output
    sums to zero exactly.  Round-trips through :func:`stable_gaps` and
    :func:`shares_from_gaps`.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    n = shares.n
    if sigma.size != n - 1:
        raise RankModelError("sigma must have length n - 1")
    if np.any(sigma <= 0):
        raise NonPositiveSigmaError("all sigma values must be positive")
    values = shares.shares
    # log1p of the adjacent ratio keeps full relative precision even when
    # neighboring shares are nearly tied (log-difference would lose ~6
    # digits there and break the 1e-10 round-trip guarantee).
    gaps = np.log1p((values[:-1] - values[1:]) / values[1:])
    if np.any(gaps <= 0):
        raise TiedSharesError(int(np.argmax(gaps <= 0)) + 1)
    sums = -(sigma ** 2) / (4.0 * gaps)
    alpha = np.empty(n)
    alpha[0] = sums[0]
    alpha[1:n - 1] = np.diff(sums)
    alpha[n - 1] = -sums[n - 2]
    return RankParameters(n=n, alpha=alpha, sigma=sigma)


def check_stability(alpha, *, require_zero_sum: bool = True,
                    tol: float = 1e-9) -> StabilityReport:
    """Prefix-sum stability test with divergent-subset analysis.

    Stable iff every proper prefix sum of alpha is strictly negative.  When
    unstable, the divergent top group has size m = argmax of the running
    averages A_k = (alpha_1 + ... + alpha_k) / k, with the smallest index
    taken on exact ties (``unique_max`` is false in that case so callers can
    warn).

    ``require_zero_sum=False`` admits trend/tax-adjusted growth rates, whose
    aggregate drift is intentionally nonzero; the argmax comparison is
    invariant to a common shift of all alpha.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    if require_zero_sum:
        scale = max(1.0, float(np.max(np.abs(alpha))))
        if abs(float(alpha.sum())) > tol * scale:
            raise BadAlphaSumError(
                f"alpha sums to {alpha.sum():.3e}, expected 0")
    sums = prefix_sum(alpha)[:-1]
    bad = sums >= 0
    if not np.any(bad):
        return StabilityReport(stable=True, first_violation=None, m=None,
                               A=None, unique_max=None)
    first = int(np.argmax(bad)) + 1
    all_sums = prefix_sum(alpha)
    A = all_sums / np.arange(1, alpha.size + 1)
    m = int(np.argmax(A)) + 1  # np.argmax returns the smallest index on ties
    unique = int(np.count_nonzero(A == A[m - 1])) == 1
    return StabilityReport(stable=False, first_violation=first, m=m,
                           A=A, unique_max=unique)


def top_group_stable(params: RankParameters, m: int) -> RankedShares:
    """Limit internal distribution of the divergent top-m group.

    Growth rates are re-expressed relative to the group's own wealth growth:
    alpha'_k = alpha_k - mean(alpha_1..alpha_m), which sums to zero over the
    group (the subtracted mean is exactly A_m when m maximizes the running
    averages).  Volatilities sigma_1..sigma_{m-1} are unchanged.  The full
    economy's limit has these shares on ranks 1..m and zero below.
    """
    if not (1 <= m <= params.n):
        raise RankModelError(f"m={m} outside 1..{params.n}")
    sums = prefix_sum(params.alpha)[:-1]
    if params.n > 1 and not np.any(sums >= 0):
        raise NotDivergentError(
            "configuration is stable; no divergent top group exists")
    if m == 1:
        return RankedShares(n=1, shares=np.array([1.0]))
    group = params.alpha[:m] - params.alpha[:m].mean()
    group_sums = prefix_sum(group)[:-1]
    if np.any(group_sums >= 0):
        raise GroupUnstableError(
            f"divergent top group of size {m} has no stable internal "
            f"distribution (prefix sum nonnegative at rank "
            f"{int(np.argmax(group_sums >= 0)) + 1})")
    gaps = gaps_from_prefix_sums(group_sums, params.sigma[:m - 1])
    shares = shares_from_gaps(gaps).shares.copy()
    # The group holds all wealth in the limit, so its total must be exactly
    # 1 in float64, not 1 up to a rounding residual: fold the residual of
    # the correctly-rounded sum into the largest share (a sub-ulp nudge).
    for _ in range(5):
        residual = 1.0 - math.fsum(shares)
        if residual == 0.0:
            break
        shares[0] += residual
    return RankedShares(n=m, shares=shares)
