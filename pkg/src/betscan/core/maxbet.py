"""Max BET: pick the strongest cross interaction and adjust its p-value.

All (2^d1 - 1)(2^d2 - 1) statistics are computed, the largest |S| wins
(ties broken by the canonical ordering, lowest a_mask then lowest b_mask),
and the winner's p-value is Bonferroni-adjusted by the number of
interactions examined.  The adjustment count includes the linear
interaction; restricting reports to the nonlinear classes is a
reporting-time filter, not an adjustment change.

p-value backends by mode:

    exact        hypergeometric when 2^max(d1, d2) divides n, else the
                 normal approximation with approximate=True
    approx       always the normal approximation
    binomial     the continuous-margin binomial null
    permutation  seeded permutation of v's ranks (exact for n <= 8)
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .bids import BidClass, BidId, bid_class_of, bid_count
from .copula import CopulaColumn
from .expansion import BitPlanes
from .nulls import (
    EXACT_PERMUTATION_MAX_N,
    pvalue_binomial,
    pvalue_hypergeometric,
    pvalue_normal,
    pvalue_permutation,
)
from .stats import all_symmetry_statistics, z_score

__all__ = ["BetResult", "max_bet", "MODES"]

MODES = ("exact", "approx", "binomial", "permutation")


@dataclass(frozen=True)
class BetResult:
    """Outcome of Max BET for one pair of variables."""

    bid: BidId
    bid_class: BidClass
    s: int
    n: int
    z: float
    p_raw: float
    p_bid_adjusted: float
    p_pair_adjusted: float | None
    approximate: bool
    method: str

    def with_pair_adjustment(self, m_pairs: int) -> "BetResult":
        return replace(
            self, p_pair_adjusted=min(1.0, m_pairs * self.p_bid_adjusted)
        )


def max_bet(
    u: BitPlanes,
    v: BitPlanes,
    mode: str = "exact",
    *,
    v_ranks: CopulaColumn | None = None,
    iterations: int = 9999,
    seed: int = 0,
) -> BetResult:
    """Run Max BET on one pair of expanded variables.

    Permutation mode needs v's rank column (the planes alone cannot be
    re-permuted at full rank resolution).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")

    stats = all_symmetry_statistics(u, v)
    best = stats[0]
    for st in stats[1:]:
        if abs(st.s) > abs(best.s):
            best = st

    n = u.n
    m_bids = bid_count(u.depth, v.depth)
    approximate = False

    if mode == "exact":
        block = 1 << max(u.depth, v.depth)
        if n % block == 0:
            p_raw = pvalue_hypergeometric(best.s, n)
            method = "hypergeometric"
        else:
            p_raw = pvalue_normal(best.s, n)
            method = "normal_approx"
            approximate = True
    elif mode == "approx":
        p_raw = pvalue_normal(best.s, n)
        method = "normal_approx"
        approximate = True
    elif mode == "binomial":
        p_raw = pvalue_binomial(best.s, n)
        method = "binomial"
    else:
        if v_ranks is None:
            raise ValueError("permutation mode needs v_ranks")
        p_raw = pvalue_permutation(
            u, v_ranks, best.bid, iterations=iterations, seed=seed
        )
        method = "permutation"
        approximate = n > EXACT_PERMUTATION_MAX_N

    return BetResult(
        bid=best.bid,
        bid_class=bid_class_of(best.bid),
        s=best.s,
        n=n,
        z=z_score(best.s, n),
        p_raw=p_raw,
        p_bid_adjusted=min(1.0, m_bids * p_raw),
        p_pair_adjusted=None,
        approximate=approximate,
        method=method,
    )
