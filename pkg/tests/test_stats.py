import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mfodbo import stats
from mfodbo.core import UsageError


def enumerate_p(a, b):
    """Two-sided rank-sum p by listing every split of the pooled ranks."""
    pooled = list(a) + list(b)
    order = sorted(range(len(pooled)), key=lambda k: pooled[k])
    ranks = [0.0] * len(pooled)
    k = 0
    while k < len(order):
        j = k
        while j + 1 < len(order) and pooled[order[j + 1]] == pooled[order[k]]:
            j += 1
        for m in range(k, j + 1):
            ranks[order[m]] = (k + j) / 2 + 1
        k = j + 1
    n_a = len(a)
    mean = n_a * (len(pooled) + 1) / 2
    observed = abs(sum(ranks[:n_a]) - mean)
    hits = total = 0
    for combo in itertools.combinations(range(len(pooled)), n_a):
        total += 1
        hits += abs(sum(ranks[c] for c in combo) - mean) >= observed - 1e-9
    return hits / total


def test_bsw_examples():
    a = [1.0, 2.0, 3.0]
    assert stats.bsw_compare(a, a) == stats.SIMILAR
    assert stats.bsw_compare([1.0, 1.0], [2.0, 2.0]) == stats.BETTER
    assert stats.bsw_compare([2.0, 2.0], [1.0, 1.0]) == stats.WORSE
    tight = [0.9, 1.1]
    loose = [0.5, 1.5]
    assert stats.bsw_compare(tight, loose) == stats.BETTER
    assert stats.bsw_compare(loose, tight) == stats.WORSE


def test_bsw_relative_tolerance():
    assert stats.bsw_compare([1e9], [1e9 + 1]) == stats.SIMILAR
    assert stats.bsw_compare([1e-12], [2e-12]) == stats.SIMILAR
    assert stats.bsw_compare([1e-12], [2e-12], tie_tol=0) == stats.BETTER


def test_bsw_tally():
    assert stats.bsw_tally(["B", "B", "S", "W"]) == (2, 1, 1)


def test_rank_sum_identical_samples():
    a = list(np.linspace(0, 1, 30))
    r = stats.wilcoxon_rank_sum(a, a)
    assert r.verdict == stats.APPROX


def test_rank_sum_all_equal_values():
    r = stats.wilcoxon_rank_sum([2.0] * 6, [2.0] * 6)
    assert (r.p_value, r.verdict) == (1.0, stats.APPROX)


def test_rank_sum_total_separation():
    rng = np.random.default_rng(0)
    a = rng.random(30)
    b = 2 + rng.random(30)
    r = stats.wilcoxon_rank_sum(a, b)
    assert r.p_value < 1e-8 and r.verdict == stats.PLUS
    assert stats.wilcoxon_rank_sum(b, a).verdict == stats.MINUS


def test_rank_sum_small_fixed_instance():
    r = stats.wilcoxon_rank_sum([1, 2, 3, 4, 5], [6, 7, 8, 9, 10])
    assert r.exact
    assert r.p_value == pytest.approx(enumerate_p([1, 2, 3, 4, 5], [6, 7, 8, 9, 10]), abs=1e-6)
    assert r.p_value == pytest.approx(2 / 252, abs=1e-12)


@pytest.mark.parametrize("seed", range(25))
def test_rank_sum_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    n_a, n_b = rng.integers(2, 9, size=2)
    # coarse values so ties are common
    a = rng.integers(0, 6, n_a).astype(float)
    b = rng.integers(1, 8, n_b).astype(float)
    if np.all(np.concatenate([a, b]) == a[0]):
        b[0] += 1
    assert stats.wilcoxon_rank_sum(a, b).p_value == pytest.approx(enumerate_p(a, b), abs=1e-6)


def test_rank_sum_eight_by_eight_continuous():
    rng = np.random.default_rng(42)
    a, b = rng.normal(size=8), rng.normal(0.8, size=8)
    assert stats.wilcoxon_rank_sum(a, b).p_value == pytest.approx(enumerate_p(a, b), abs=1e-6)


def test_rank_sum_large_matches_scipy_asymptotic():
    from scipy.stats import mannwhitneyu

    rng = np.random.default_rng(7)
    a, b = np.round(rng.normal(size=30), 1), np.round(rng.normal(0.3, size=30), 1)
    r = stats.wilcoxon_rank_sum(a, b)
    assert not r.exact
    want = mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True).pvalue
    assert r.p_value == pytest.approx(want, rel=1e-10)


@settings(max_examples=50)
@given(arrays(float, 12, elements=st.integers(0, 9).map(float)),
       arrays(float, 10, elements=st.integers(0, 9).map(float)))
def test_rank_sum_antisymmetric(a, b):
    ab, ba = stats.wilcoxon_rank_sum(a, b), stats.wilcoxon_rank_sum(b, a)
    assert ab.p_value == pytest.approx(ba.p_value, abs=1e-12)
    flip = {stats.PLUS: stats.MINUS, stats.MINUS: stats.PLUS, stats.APPROX: stats.APPROX}
    assert flip[ab.verdict] == ba.verdict


def test_rank_sum_needs_two_values():
    with pytest.raises(UsageError):
        stats.wilcoxon_rank_sum([1.0], [1.0, 2.0])


CRAFTED = [
    [[1, 1, 1], [2, 2, 2]],
    [[1, 3], [2, 2], [3, 1]],
    [[1, 5], [1, 6], [2, 7]],
    [[0.1, 9, 4], [0.2, 8, 4], [0.3, 7, 4], [0.4, 6, 4]],
    [[5, 5], [5, 5], [1, 9]],
]
HAND = [
    [1.0, 2.0],
    [2.0, 2.0, 2.0],
    # function 1: tie for best -> 1.5, 1.5, 3; function 2: 1, 2, 3
    [1.25, 1.75, 3.0],
    # f1 ascending 1..4, f2 descending 4..1, f3 four-way tie 2.5 each
    [(1 + 4 + 2.5) / 3, (2 + 3 + 2.5) / 3, (3 + 2 + 2.5) / 3, (4 + 1 + 2.5) / 3],
    # f1: (2.5, 2.5, 1), f2: (1.5, 1.5, 3)
    [2.0, 2.0, 2.0],
]


@pytest.mark.parametrize("idx", range(5))
def test_friedman_crafted(idx):
    np.testing.assert_allclose(stats.friedman_ranks(CRAFTED[idx]), HAND[idx], atol=1e-12)


def test_friedman_rank_sum_without_ties():
    rng = np.random.default_rng(0)
    m = rng.random((5, 8))
    assert stats.friedman_ranks(m).sum() == pytest.approx(5 * 6 / 2)


def test_friedman_monotone_invariance():
    rng = np.random.default_rng(1)
    m = rng.random((4, 6)) + 0.1
    np.testing.assert_array_equal(stats.friedman_ranks(m), stats.friedman_ranks(np.log(m) ** 3))


def test_friedman_named_and_run_axis():
    m = np.array([[[1, 1], [3, 3]], [[2, 2], [1, 1]]], dtype=float)
    assert stats.friedman_ranks(m, ["a", "b"]) == {"a": 1.5, "b": 1.5}
    with pytest.raises(UsageError):
        stats.friedman_ranks([[1, 2]])


def test_diversity_examples():
    assert stats.diversity(np.array([[-1.0], [1.0]])) == 1.0
    assert stats.diversity(np.ones((5, 3))) == 0.0
    assert stats.diversity(np.array([[4.0, 2.0]])) == 0.0


def test_exploration_examples():
    snaps = [np.array([[-2.0], [2.0]]), np.array([[-1.0], [1.0]]), np.zeros((2, 1))]
    xpl, xpt = stats.exploration_exploitation(snaps)
    assert xpl.tolist() == [100.0, 50.0, 0.0]
    assert xpt.tolist() == [0.0, 50.0, 100.0]
    same, _ = stats.exploration_exploitation([np.ones((3, 2))])
    assert same.tolist() == [0.0]


@given(arrays(float, st.integers(1, 50), elements=st.floats(0, 1e6)))
def test_balance_sums_to_hundred(div):
    a, b = stats.balance_from_diversity(div)
    np.testing.assert_allclose(a + b, 100.0, atol=1e-9)
    assert np.all(a >= 0) and np.all(a <= 100)


def test_summarize():
    s = stats.summarize([1.0, 2.0, 3.0, 10.0])
    assert s["mean"] == 4.0 and s["best"] == 1.0 and s["worst"] == 10.0 and s["median"] == 2.5
    assert s["std"] == pytest.approx(np.std([1, 2, 3, 10], ddof=1))
