"""Domain types, validation, and bracket arithmetic shared by all modules.

Conventions used throughout the package:

* Ranks are 1-indexed and counted from the top: rank 1 is the wealthiest
  household.  Storage is 0-indexed numpy arrays, so ``shares[k]`` holds the
  share of rank ``k + 1``.
* Percent brackets ``(lo_pct, hi_pct)`` are half-open intervals of percent
  rank counted from the top; the bracket ``(0, 0.01)`` at n = 10**6 covers
  ranks 1..100.
* ``alpha`` values are annual relative log-growth rates (1/year); ``sigma``
  values are gap volatilities (1/sqrt(year)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "RankModelError",
    "NonPositiveShareError",
    "NotDescendingError",
    "BadNormalizationError",
    "NonIntegerBoundaryError",
    "BracketGapError",
    "BadSumError",
    "BadAlphaSumError",
    "NonPositiveSigmaError",
    "NonPositiveKappaError",
    "TiedSharesError",
    "UnstableError",
    "NotDivergentError",
    "GroupUnstableError",
    "UnknownScenarioError",
    "NegativeInputError",
    "FitFailedError",
    "InfeasibleTargetError",
    "ParseError",
    "RankedShares",
    "RankParameters",
    "GroupedShares",
    "VolatilityTable",
    "TrendSpec",
    "TaxSchedule",
    "StabilityReport",
    "make_ranked_shares",
    "make_rank_parameters",
    "bracket_to_ranks",
    "validate_brackets",
    "group_shares",
    "prefix_sum",
]


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class RankModelError(ValueError):
    """Base class for all validation and model errors in this package."""


class NonPositiveShareError(RankModelError):
    """A wealth share was zero or negative."""


class NotDescendingError(RankModelError):
    """Shares were not sorted in descending rank order."""


class BadNormalizationError(RankModelError):
    """Shares deviate from summing to one by more than the tolerance."""


class NonIntegerBoundaryError(RankModelError):
    """A percent bracket boundary does not land on an integer rank."""


class BracketGapError(RankModelError):
    """Brackets overlap or leave a gap instead of partitioning [0, 100)."""


class BadSumError(RankModelError):
    """Grouped shares do not sum to one within tolerance."""


class BadAlphaSumError(RankModelError):
    """Relative growth rates do not sum to zero within tolerance."""


class NonPositiveSigmaError(RankModelError):
    """A gap volatility was zero or negative."""


class NonPositiveKappaError(RankModelError):
    """A reversion rate kappa was zero or negative."""


class TiedSharesError(RankModelError):
    """Adjacent ranks hold equal shares where strict ordering is required."""

    def __init__(self, rank: int):
        self.rank = int(rank)
        super().__init__(f"tied shares at rank {self.rank}: inversion requires "
                         f"strictly descending shares")


class UnstableError(RankModelError):
    """Stability precondition violated (some prefix sum of alpha >= 0)."""

    def __init__(self, rank: int):
        self.rank = int(rank)
        super().__init__(f"unstable configuration: prefix sum of alpha is "
                         f"nonnegative at rank {self.rank}")


class NotDivergentError(RankModelError):
    """Divergent-subset analysis requested on a stable configuration."""


class GroupUnstableError(RankModelError):
    """The divergent top group has no internal stable distribution."""


class UnknownScenarioError(RankModelError):
    """Scenario preset id outside 1..4."""


class NegativeInputError(RankModelError):
    """An input required to be nonnegative was negative."""


class FitFailedError(RankModelError):
    """The piecewise log-log fit optimizer did not converge."""


class InfeasibleTargetError(RankModelError):
    """Grouped target has non-monotone density; no descending fit exists."""


class ParseError(RankModelError):
    """A data file failed to parse."""

    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = int(line)
        super().__init__(f"{self.path}:{self.line}: {message}")


# ---------------------------------------------------------------------------
# Numeric helpers
# ---------------------------------------------------------------------------

def prefix_sum(values: np.ndarray) -> np.ndarray:
    """Running sums computed in extended precision.

    At n = 10**6 a naive float64 cumulative sum loses enough precision to
    break round-trip identities, so sums are accumulated in long double and
    rounded back once.
    """
    return np.cumsum(np.asarray(values, dtype=np.longdouble)).astype(np.float64)


def _as_float_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise RankModelError(f"{name} must be a nonempty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise RankModelError(f"{name} contains non-finite values")
    return arr


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RankedShares:
    """Full descending vector of wealth shares by rank, summing to one."""

    n: int
    shares: np.ndarray

    def __post_init__(self):
        shares = _as_float_vector(self.shares, "shares")
        if self.n != shares.size:
            raise RankModelError("n does not match length of shares")
        shares.setflags(write=False)
        object.__setattr__(self, "shares", shares)


@dataclass(frozen=True)
class RankParameters:
    """Per-rank relative growth rates and gap volatilities.

    ``alpha`` has length n (1/year), ``sigma`` length n - 1 (1/sqrt(year)).
    ``kappa`` is always recomputed from alpha, never stored.  The sum-zero
    convention on alpha is enforced where required (inversion output,
    kappa_from_alpha) rather than here, because trend- and tax-adjusted
    parameter sets intentionally carry nonzero aggregate drift.
    """

    n: int
    alpha: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        alpha = _as_float_vector(self.alpha, "alpha")
        sigma = _as_float_vector(self.sigma, "sigma")
        if self.n != alpha.size:
            raise RankModelError("n does not match length of alpha")
        if sigma.size != self.n - 1:
            raise RankModelError("sigma must have length n - 1")
        if np.any(sigma <= 0):
            raise NonPositiveSigmaError("all sigma values must be positive")
        alpha.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "sigma", sigma)

    @property
    def kappa(self) -> np.ndarray:
        """Reversion rates kappa_k = -2 (alpha_1 + ... + alpha_k), k < n."""
        return -2.0 * prefix_sum(self.alpha)[:-1]


Bracket = Tuple[float, float]


@dataclass(frozen=True)
class GroupedShares:
    """Bracket-level wealth shares, brackets in percent rank from the top."""

    brackets: Tuple[Bracket, ...]
    shares: np.ndarray

    def __post_init__(self):
        brackets = tuple((float(lo), float(hi)) for lo, hi in self.brackets)
        shares = _as_float_vector(self.shares, "shares")
        if len(brackets) != shares.size:
            raise RankModelError("brackets and shares differ in length")
        validate_brackets(brackets, require_partition=True)
        if abs(shares.sum() - 1.0) > 1e-6:
            raise BadSumError(f"grouped shares sum to {shares.sum():.8f}, "
                              f"expected 1 within 1e-6")
        shares.setflags(write=False)
        object.__setattr__(self, "brackets", brackets)
        object.__setattr__(self, "shares", shares)


@dataclass(frozen=True)
class VolatilityTable:
    """Bracket-level low/high gap-volatility estimates (1/sqrt(year))."""

    brackets: Tuple[Bracket, ...]
    sigma_low: np.ndarray
    sigma_high: np.ndarray

    def __post_init__(self):
        brackets = tuple((float(lo), float(hi)) for lo, hi in self.brackets)
        low = _as_float_vector(self.sigma_low, "sigma_low")
        high = _as_float_vector(self.sigma_high, "sigma_high")
        if not (len(brackets) == low.size == high.size):
            raise RankModelError("brackets and sigma columns differ in length")
        validate_brackets(brackets, require_partition=True)
        if np.any(low <= 0) or np.any(high <= 0):
            raise NonPositiveSigmaError("volatilities must be positive")
        low.setflags(write=False)
        high.setflags(write=False)
        object.__setattr__(self, "brackets", brackets)
        object.__setattr__(self, "sigma_low", low)
        object.__setattr__(self, "sigma_high", high)

    def variant(self, which: str) -> np.ndarray:
        if which == "low":
            return self.sigma_low
        if which == "high":
            return self.sigma_high
        raise RankModelError(f"unknown sigma variant {which!r}; "
                             f"expected 'low' or 'high'")


@dataclass(frozen=True)
class TrendSpec:
    """Annual log-share growth adjustments by bracket (1/year).

    Brackets need not cover [0, 100); uncovered ranks get zero adjustment.
    """

    brackets: Tuple[Bracket, ...] = ()
    growth: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        brackets = tuple((float(lo), float(hi)) for lo, hi in self.brackets)
        growth = np.asarray(self.growth, dtype=np.float64)
        if len(brackets) != growth.size:
            raise RankModelError("brackets and growth differ in length")
        validate_brackets(brackets, require_partition=False)
        growth.setflags(write=False)
        object.__setattr__(self, "brackets", brackets)
        object.__setattr__(self, "growth", growth)


@dataclass(frozen=True)
class TaxSchedule:
    """Annual capital tax rates by bracket (1/year, nonnegative)."""

    brackets: Tuple[Bracket, ...] = ()
    rate: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        brackets = tuple((float(lo), float(hi)) for lo, hi in self.brackets)
        rate = np.asarray(self.rate, dtype=np.float64)
        if len(brackets) != rate.size:
            raise RankModelError("brackets and rate differ in length")
        validate_brackets(brackets, require_partition=False)
        if np.any(rate < 0):
            raise NegativeInputError("tax rates must be nonnegative")
        rate.setflags(write=False)
        object.__setattr__(self, "brackets", brackets)
        object.__setattr__(self, "rate", rate)


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the prefix-sum stability test on alpha.

    ``stable`` is true iff every proper prefix sum of alpha is strictly
    negative.  When unstable, ``m`` is the size of the divergent top group
    (smallest argmax of the running averages ``A``), and ``unique_max``
    records whether that argmax is unique.
    """

    stable: bool
    first_violation: Optional[int]
    m: Optional[int]
    A: Optional[np.ndarray]
    unique_max: Optional[bool]

    def __post_init__(self):
        if self.stable != (self.first_violation is None):
            raise RankModelError("stable must match absence of first_violation")
        if self.stable != (self.m is None):
            raise RankModelError("m must be present exactly when unstable")


# ---------------------------------------------------------------------------
# Constructors and bracket arithmetic
# ---------------------------------------------------------------------------

def make_ranked_shares(values) -> RankedShares:
    """Validate and normalize a descending share vector.

    Renormalizes when the sum deviates from one by at most 1e-6 (external
    data is typically rounded to a few digits); larger deviations raise
    :class:`BadNormalizationError`.
    """
    arr = _as_float_vector(values, "shares")
    if np.any(arr <= 0):
        raise NonPositiveShareError("all shares must be strictly positive")
    if np.any(np.diff(arr) > 0):
        k = int(np.argmax(np.diff(arr) > 0)) + 1
        raise NotDescendingError(f"shares increase from rank {k} to {k + 1}")
    total = arr.sum()
    if abs(total - 1.0) > 1e-6:
        raise BadNormalizationError(f"shares sum to {total:.8f}; deviation "
                                    f"from 1 exceeds 1e-6")
    return RankedShares(n=arr.size, shares=arr / total)


def make_rank_parameters(alpha, sigma, *, tol: float = 1e-9) -> RankParameters:
    """Construct RankParameters enforcing the sum-zero convention on alpha."""
    alpha = _as_float_vector(alpha, "alpha")
    scale = max(1.0, float(np.max(np.abs(alpha))))
    if abs(float(alpha.sum())) > tol * scale:
        raise BadAlphaSumError(f"alpha sums to {alpha.sum():.3e}, expected 0")
    return RankParameters(n=alpha.size, alpha=alpha, sigma=np.asarray(sigma))


def bracket_to_ranks(bracket: Bracket, n: int) -> Tuple[int, int]:
    """Map a percent bracket to an inclusive 1-indexed rank range.

    ``(0, 0.01)`` at n = 10**6 maps to ranks (1, 100).  Boundaries must land
    on integer ranks for the given n.
    """
    lo_pct, hi_pct = float(bracket[0]), float(bracket[1])
    if not (0.0 <= lo_pct < hi_pct <= 100.0):
        raise RankModelError(f"invalid bracket ({lo_pct}, {hi_pct})")
    ranks = []
    for pct in (lo_pct, hi_pct):
        exact = pct * n / 100.0
        nearest = round(exact)
        if abs(exact - nearest) > 1e-6 * max(1.0, exact):
            raise NonIntegerBoundaryError(
                f"bracket boundary {pct}% maps to non-integer rank {exact} "
                f"at n={n}")
        ranks.append(int(nearest))
    return ranks[0] + 1, ranks[1]


def validate_brackets(brackets: Sequence[Bracket], *,
                      require_partition: bool) -> None:
    """Check bracket ordering; optionally that they partition [0, 100)."""
    prev_hi = None
    for lo, hi in brackets:
        if not (0.0 <= lo < hi <= 100.0):
            raise BracketGapError(f"invalid bracket ({lo}, {hi})")
        if prev_hi is not None:
            if require_partition and abs(lo - prev_hi) > 1e-12:
                raise BracketGapError(
                    f"brackets do not partition [0, 100): gap or overlap "
                    f"between {prev_hi}% and {lo}%")
            if not require_partition and lo < prev_hi - 1e-12:
                raise BracketGapError(
                    f"brackets overlap near {lo}%")
        prev_hi = hi
    if require_partition and brackets:
        if abs(brackets[0][0]) > 1e-12 or abs(brackets[-1][1] - 100.0) > 1e-12:
            raise BracketGapError("brackets must cover [0, 100) exactly")


def group_shares(shares, brackets: Sequence[Bracket]) -> GroupedShares:
    """Aggregate ranked shares into bracket-level group sums.

    ``shares`` may be a :class:`RankedShares` or a plain descending vector
    (the projection engine produces limit distributions containing exact
    zeros, which RankedShares would reject).
    """
    vec = shares.shares if isinstance(shares, RankedShares) else \
        np.asarray(shares, dtype=np.float64)
    n = vec.size
    cums = np.concatenate([[0.0], prefix_sum(vec)])
    out = np.empty(len(brackets))
    for i, bracket in enumerate(brackets):
        lo_rank, hi_rank = bracket_to_ranks(bracket, n)
        out[i] = cums[hi_rank] - cums[lo_rank - 1]
    return GroupedShares(brackets=tuple(brackets), shares=out)
