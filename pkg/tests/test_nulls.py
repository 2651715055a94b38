import numpy as np
import pytest

from betscan.core import (
    BidId,
    all_bids,
    binary_expansion,
    empirical_copula,
    pvalue_binomial,
    pvalue_hypergeometric,
    pvalue_normal,
    pvalue_permutation,
)
from betscan.errors import DivisibilityViolationError, ParityViolationError

from ._oracles import (
    binomial_tail,
    hypergeom_tail,
    permutation_distribution,
    permutation_tail,
)


def planes_for(ranks, depth=2):
    return binary_expansion(empirical_copula(np.asarray(ranks, float)), depth)


def test_binomial_extremes():
    assert pvalue_binomial(10, 10) == pytest.approx(2.0 ** (1 - 10), rel=1e-12)
    assert pvalue_binomial(0, 10) == 1.0


def test_binomial_matches_enumeration():
    for n, s in [(10, 6), (10, 2), (11, 5), (17, 9), (24, 0)]:
        assert pvalue_binomial(s, n) == pytest.approx(binomial_tail(s, n), rel=1e-12)


def test_binomial_parity_error():
    with pytest.raises(ParityViolationError):
        pvalue_binomial(3, 10)


def test_hypergeometric_extremes():
    assert pvalue_hypergeometric(8, 8) == pytest.approx(1 / 35, rel=1e-12)
    assert pvalue_hypergeometric(0, 8) == 1.0


def test_hypergeometric_matches_enumeration():
    for n in (8, 12, 64):
        for s in range(0, n + 1, 4):
            if (s - n) % 4 == 0:
                assert pvalue_hypergeometric(s, n) == pytest.approx(
                    hypergeom_tail(s, n), rel=1e-12
                )


def test_hypergeometric_preconditions():
    with pytest.raises(DivisibilityViolationError):
        pvalue_hypergeometric(3, 10)
    with pytest.raises(ParityViolationError):
        pvalue_hypergeometric(2, 8)


def test_pvalue_monotone_in_s():
    for backend, n, step in (
        (pvalue_binomial, 18, 2),
        (pvalue_hypergeometric, 16, 4),
        (pvalue_normal, 17, 1),
    ):
        values = [backend(s, n) for s in range(0, n + 1, step)]
        assert all(a >= b for a, b in zip(values, values[1:]))


def test_permutation_exact_matches_hypergeometric():
    u = planes_for(range(1, 9))
    v_ranks = empirical_copula(np.arange(8, 0, -1, dtype=float))
    p = pvalue_permutation(u, v_ranks, BidId(1, 1))
    assert p == pytest.approx(1 / 35, rel=1e-12)


def test_permutation_exact_s_zero_is_one():
    # v arranged so the linear statistic is exactly 0
    u = planes_for(range(1, 9))
    v_ranks = empirical_copula(np.array([1.0, 5, 2, 6, 7, 3, 8, 4]))
    from betscan.core import symmetry_statistic

    v = planes_for([1, 5, 2, 6, 7, 3, 8, 4])
    assert symmetry_statistic(u, v, BidId(1, 1)).s == 0
    assert pvalue_permutation(u, v_ranks, BidId(1, 1)) == 1.0


def test_permutation_exact_every_bid_n8():
    rng = np.random.default_rng(2)
    ur = rng.permutation(8) + 1
    vr = rng.permutation(8) + 1
    u = planes_for(ur)
    v_ranks = empirical_copula(vr.astype(float))
    for bid in all_bids(2, 2):
        dist = permutation_distribution(ur, (bid.a_mask, bid.b_mask), 2)
        from betscan.core import symmetry_statistic

        s_obs = symmetry_statistic(u, planes_for(vr), bid).s
        expected = permutation_tail(dist, s_obs, 8)
        assert pvalue_permutation(u, v_ranks, bid) == pytest.approx(
            expected, rel=1e-12
        )


def test_permutation_monte_carlo_deterministic_and_corrected():
    rng = np.random.default_rng(4)
    ur = rng.permutation(40) + 1
    vr = rng.permutation(40) + 1
    u = planes_for(ur)
    v_ranks = empirical_copula(vr.astype(float))
    p1 = pvalue_permutation(u, v_ranks, BidId(3, 1), iterations=500, seed=99)
    p2 = pvalue_permutation(u, v_ranks, BidId(3, 1), iterations=500, seed=99)
    assert p1 == p2
    assert p1 >= 1 / 501  # add-one correction keeps it positive
    p3 = pvalue_permutation(u, v_ranks, BidId(3, 1), iterations=500, seed=100)
    assert abs(p3 - p1) < 0.25


def test_normal_approx_basics():
    assert pvalue_normal(0, 817) == 1.0
    # z = 13.89 is far in the tail but still positive
    p = pvalue_normal(397, 817)
    assert 0.0 < p < 1e-40


def test_null_distribution_fits_hypergeometric_per_bid():
    # 10k independent pairings at n=64: (S+n)/4 for every interaction
    # follows Hypergeometric(64, 32, 32); chi-square GOF at p > 0.001
    from scipy import stats as sps

    rng = np.random.default_rng(646464)
    n, sims = 64, 10_000
    u = planes_for(np.arange(1, n + 1))
    from betscan.core import all_symmetry_statistics

    half = n // 2
    ks = np.zeros((9, sims), dtype=np.int64)
    for t in range(sims):
        v = planes_for(rng.permutation(n) + 1)
        for b, st in enumerate(all_symmetry_statistics(u, v)):
            ks[b, t] = (st.s + n) // 4

    support = np.arange(half + 1)
    pmf = sps.hypergeom(n, half, half).pmf(support)
    for b in range(9):
        observed = np.bincount(ks[b], minlength=half + 1).astype(float)
        # merge tail bins until every expected count is >= 5
        exp = pmf * sims
        keep = exp >= 5
        lo, hi = np.argmax(keep), len(keep) - np.argmax(keep[::-1]) - 1
        obs_m = np.concatenate(
            [[observed[: lo + 1].sum()], observed[lo + 1 : hi], [observed[hi:].sum()]]
        )
        exp_m = np.concatenate([[exp[: lo + 1].sum()], exp[lo + 1 : hi], [exp[hi:].sum()]])
        stat = float(((obs_m - exp_m) ** 2 / exp_m).sum())
        p = float(sps.chi2.sf(stat, len(obs_m) - 1))
        assert p > 0.001, f"interaction {b}: GOF p = {p}"
