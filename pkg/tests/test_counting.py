import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evenpowers.arith import exp_sum_f, exp_sum_g, iroot
from evenpowers.counting import (
    CountConfig,
    count_representations,
    density_csv,
    density_scan,
    representation_counts,
    restricted_count,
    value_lists,
)
from evenpowers.errors import ScaleLimitError
from evenpowers.holder import ExponentSet

K24 = ExponentSet([2, 4])
K246 = ExponentSet([2, 4, 6])


def brute_count(n, ks, allow_zero=False):
    lo = 0 if allow_zero else 1
    ranges = [range(lo, iroot(n, k) + 1) for k in ks]
    return sum(1 for xs in itertools.product(*ranges) if sum(x ** k for x, k in zip(xs, ks)) == n)


def test_five_is_square_plus_fourth():
    assert count_representations(5, CountConfig(K24)) == 1


def test_three_unreachable():
    assert count_representations(3, CountConfig(K24)) == 0


def test_zero_with_zeros():
    assert count_representations(0, CountConfig(K246, allow_zero=True)) == 1


def test_below_minimum_is_zero():
    for n in range(len(K246)):
        assert count_representations(n, CountConfig(K246)) == 0


@pytest.mark.parametrize("allow_zero", [False, True])
def test_nested_equals_mitm_up_to_1e4(allow_zero):
    cfg = CountConfig(K246, allow_zero=allow_zero)
    R = representation_counts(10 ** 4, cfg)
    for n in range(0, 10 ** 4 + 1, 7):
        a = count_representations(n, cfg, "nested")
        assert a == count_representations(n, cfg, "mitm") == R[n]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 3000), st.booleans(),
       st.lists(st.sampled_from([2, 3, 4, 5, 6]), min_size=1, max_size=3, unique=True))
def test_count_matches_product_enumeration(n, allow_zero, ks):
    cfg = CountConfig(ExponentSet.of(ks), allow_zero=allow_zero)
    assert count_representations(n, cfg) == brute_count(n, sorted(ks), allow_zero)


def test_large_n_uses_mitm():
    n = 5 * 10 ** 6
    cfg = CountConfig(K24)
    assert count_representations(n, cfg) == brute_count(n, [2, 4])


def test_scale_limits():
    with pytest.raises(ScaleLimitError, match="10"):
        count_representations(10 ** 6 + 1, CountConfig(K24), "nested")
    with pytest.raises(ScaleLimitError):
        count_representations(10 ** 8 + 1, CountConfig(K24))
    with pytest.raises(ScaleLimitError):
        CountConfig(ExponentSet.even(2, 18))
    with pytest.raises(ScaleLimitError):
        density_scan(10 ** 7 + 1, CountConfig(K24))


def test_bad_arguments():
    with pytest.raises(ValueError):
        count_representations(-1, CountConfig(K24))
    with pytest.raises(ValueError):
        count_representations(5, CountConfig(K24), "fft")
    with pytest.raises(ValueError):
        CountConfig(ExponentSet([2, 8]), restricted=True)


def test_density_squares():
    rows = density_scan(100, CountConfig(ExponentSet([2])))
    assert [(r.decade, r.representable) for r in rows] == [(1, 3), (2, 10)]
    assert rows[-1].fraction == 0.1


def test_density_zero_trend():
    rows = density_scan(10 ** 5, CountConfig(K246, allow_zero=True))
    assert rows[4].fraction < rows[2].fraction


def test_density_superset_monotone():
    small = density_scan(10 ** 5, CountConfig(K246, allow_zero=True))
    big = density_scan(10 ** 5, CountConfig(ExponentSet([2, 4, 6, 8]), allow_zero=True))
    for a, b in zip(small, big):
        assert b.fraction >= a.fraction


def test_density_csv_layout():
    text = density_csv(density_scan(1000, CountConfig(ExponentSet([2]))))
    assert text.splitlines() == ["decade,upto,representable,fraction",
                                 "1,10,3,0.3", "2,100,10,0.1", "3,1000,31,0.031"]


# ------------------------------------------------------------------ restricted


def restricted_oracle(n, ks, gamma, N):
    """Builds X_k and Y_k by explicit filtering of integers."""
    Y = math.floor(N ** gamma + 1e-12)
    sets = []
    for k in ks:
        if k in (2, 4, 6):
            xs = [x for x in range(1, 3 * iroot(N, k) + 3) if N < x ** k <= 2 ** k * N]
        else:
            def smooth(m):
                for p in range(2, m + 1):
                    while m % p == 0:
                        if p > Y:
                            return False
                        m //= p
                return True
            xs = [x for x in range(1, iroot(N, k) + 1) if smooth(x)]
        sets.append([x ** k for x in xs])
    return sum(1 for vs in itertools.product(*sets) if sum(vs) == n)


def test_restricted_windows_out_of_reach():
    assert restricted_count(10 ** 4, K24, 0.25) == 0 == restricted_oracle(10 ** 4, [2, 4], 0.25, 10 ** 4)


@pytest.mark.parametrize("n", [377, 500, 1321, 881, 1000, 1521])
def test_restricted_matches_filter_oracle(n):
    got = restricted_count(n, K24, 0.25, N=100)
    assert got == restricted_oracle(n, [2, 4], 0.25, 100)


def test_restricted_nonzero_case():
    assert restricted_count(377, K24, 0.25, N=100) == 1  # 11^2 + 4^4


@pytest.mark.parametrize("n", [200, 5000, 40000])
def test_restricted_with_smooth_part(n):
    K = ExponentSet([2, 8])
    assert restricted_count(n, K, 0.3, N=n // 3) == restricted_oracle(n, [2, 8], 0.3, n // 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 20000))
def test_restricted_at_most_full(n):
    full = count_representations(n, CountConfig(K246))
    for N in (n, max(1, n // 3), max(1, n // 10)):
        assert restricted_count(n, K246, 0.2, N=N) <= full


def test_value_lists_sorted_and_bounded():
    for vals in value_lists(1000, CountConfig(K246)):
        assert np.all(np.diff(vals) > 0) and vals[-1] <= 1000


def test_parseval_links_sums_and_counts():
    # sum_t R(t)^2 = integral of |f_2 f_4|^2, exact as a mean over M-th roots of unity
    N = 64
    cfg = CountConfig(K24, restricted=True, N=N)
    top = 4 * N + 16 * N
    R = representation_counts(top, cfg)
    lhs = int(np.sum(R.astype(np.int64) ** 2))
    M = 2 * top + 1
    vals = [abs(exp_sum_f(2, N, j / M) * exp_sum_f(4, N, j / M)) ** 2 for j in range(M)]
    assert lhs > 0
    assert math.fsum(vals) / M == pytest.approx(lhs, rel=1e-9)


def test_parseval_with_smooth_sum():
    N, gamma = 200, 0.3
    cfg = CountConfig(ExponentSet([2, 8]), restricted=True, gamma=gamma, N=N)
    top = 4 * N + N
    R = representation_counts(top, cfg)
    lhs = int(np.sum(R ** 2))
    M = 2 * top + 1
    vals = [abs(exp_sum_f(2, N, j / M) * exp_sum_g(8, N, gamma, j / M)) ** 2 for j in range(M)]
    assert math.fsum(vals) / M == pytest.approx(lhs, rel=1e-9)
