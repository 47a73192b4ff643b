"""Comparison statistics for optimizer results.

B|S|W tallies, the Wilcoxon rank-sum test, Friedman mean ranks and a
diversity-based exploration/exploitation split.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import ndtr
from scipy.stats import rankdata

from .core import UsageError

BETTER, SIMILAR, WORSE = "B", "S", "W"
PLUS, APPROX, MINUS = "+", "≈", "−"

DEFAULT_TIE_TOL = 1e-8
DEFAULT_ALPHA = 0.05

# exact null distribution below this many combined observations
EXACT_LIMIT = 20


def _sample(a, name: str, min_len: int = 1) -> np.ndarray:
    x = np.asarray(a, dtype=float).reshape(-1)
    if x.size < min_len:
        raise UsageError(f"{name} needs at least {min_len} values, got {x.size}")
    return x


def bsw_compare(a, b, tie_tol: float = DEFAULT_TIE_TOL) -> str:
    """Better/Similar/Worse of sample ``a`` against ``b`` for minimization.

    Means within ``tie_tol * max(1, |mean_b|)`` are tied; a tie is then
    broken by the smaller standard deviation, and stays Similar if those
    tie as well.
    """
    a, b = _sample(a, "a"), _sample(b, "b")
    ma, mb = float(np.mean(a)), float(np.mean(b))
    scale = max(1.0, abs(mb))
    if abs(ma - mb) > tie_tol * scale:
        return BETTER if ma < mb else WORSE
    sa, sb = _std(a), _std(b)
    if abs(sa - sb) <= tie_tol * max(1.0, abs(sb)):
        return SIMILAR
    return BETTER if sa < sb else WORSE


def _std(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1)) if x.size > 1 else 0.0


def bsw_tally(verdicts: Sequence[str]) -> tuple[int, int, int]:
    return (verdicts.count(BETTER), verdicts.count(SIMILAR), verdicts.count(WORSE))


@dataclass(frozen=True)
class RankSumResult:
    p_value: float
    verdict: str
    statistic: float
    exact: bool


def _exact_rank_sum_p(ranks_a2: np.ndarray, ranks_all2: np.ndarray) -> float:
    """Two-sided exact p for the rank sum of the first sample.

    Ranks come doubled so midranks are integers. The null distribution of
    the sum over all n_a-subsets is counted by dynamic programming, which
    handles ties exactly.
    """
    n_a = ranks_a2.size
    total = int(ranks_all2.sum())
    # counts[k][s]: number of k-subsets with doubled rank sum s
    counts = np.zeros((n_a + 1, total + 1), dtype=float)
    counts[0, 0] = 1.0
    for r in ranks_all2.astype(int):
        counts[1:, r:] += counts[:-1, : total + 1 - r].copy()
    dist = counts[n_a]
    dist = dist / dist.sum()
    observed = int(ranks_a2.sum())
    expected = n_a * total / ranks_all2.size
    dev = abs(observed - expected)
    sums = np.arange(total + 1)
    # tolerance absorbs rounding in the expected value
    p = float(dist[np.abs(sums - expected) >= dev - 1e-9].sum())
    return min(1.0, p)


def wilcoxon_rank_sum(a, b, alpha: float = DEFAULT_ALPHA) -> RankSumResult:
    """Two-sided rank-sum test of ``a`` against ``b`` (minimization verdict).

    Small samples (fewer than 20 values in total) use the exact null
    distribution; larger ones use the normal approximation with tie and
    continuity correction. The verdict is ``+`` when ``a`` is significantly
    lower, ``−`` when significantly higher and ``≈`` otherwise.
    """
    a, b = _sample(a, "a", 2), _sample(b, "b", 2)
    n_a, n_b = a.size, b.size
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    w = float(ranks[:n_a].sum())
    if np.all(pooled == pooled[0]):
        return RankSumResult(1.0, APPROX, w, n_a + n_b < EXACT_LIMIT)

    if n_a + n_b < EXACT_LIMIT:
        p = _exact_rank_sum_p(2 * ranks[:n_a], 2 * ranks)
        exact = True
    else:
        n = n_a + n_b
        _, tie_counts = np.unique(pooled, return_counts=True)
        tie_term = float(np.sum(tie_counts**3 - tie_counts)) / (n * (n - 1))
        var = n_a * n_b / 12.0 * ((n + 1) - tie_term)
        diff = w - n_a * (n + 1) / 2.0
        z = (abs(diff) - 0.5) / math.sqrt(var) if abs(diff) >= 0.5 else 0.0
        p = min(1.0, 2.0 * float(ndtr(-z)))
        exact = False

    if p < alpha:
        verdict = PLUS if np.mean(a) < np.mean(b) else MINUS
    else:
        verdict = APPROX
    return RankSumResult(p, verdict, w, exact)


def friedman_ranks(matrix, names: Sequence[str] | None = None) -> dict | np.ndarray:
    """Mean rank of each algorithm across functions (1 = lowest mean).

    ``matrix`` is algorithms x functions of mean fitness, or algorithms x
    functions x runs, in which case the run axis is averaged first. Ties
    share the average rank. With ``names`` a name -> rank dict is returned.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim == 3:
        m = m.mean(axis=2)
    if m.ndim != 2 or m.shape[0] < 2 or m.shape[1] < 2:
        raise UsageError(f"need at least 2 algorithms x 2 functions, got shape {m.shape}")
    ranks = rankdata(m, axis=0).mean(axis=1)
    if names is None:
        return ranks
    if len(names) != m.shape[0]:
        raise UsageError("one name per algorithm row is required")
    return dict(zip(names, ranks.tolist()))


def diversity(positions) -> float:
    """Mean over dimensions of the mean absolute deviation from the median."""
    x = np.asarray(positions, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise UsageError("positions must be an (N, dim) array with N >= 1")
    if x.shape[0] == 1:
        return 0.0
    return float(np.mean(np.abs(x - np.median(x, axis=0))))


def balance_from_diversity(div) -> tuple[np.ndarray, np.ndarray]:
    """Exploration and exploitation percentages from a diversity curve."""
    d = np.asarray(div, dtype=float).reshape(-1)
    peak = float(d.max()) if d.size else 0.0
    if peak > 0:
        # divide first so the ratio never exceeds 1
        explore = 100.0 * (d / peak)
    else:
        explore = np.zeros_like(d)
    return explore, 100.0 - explore


def exploration_exploitation(snapshots: Sequence) -> tuple[np.ndarray, np.ndarray]:
    if len(snapshots) < 1:
        raise UsageError("need at least one population snapshot")
    return balance_from_diversity([diversity(s) for s in snapshots])


def summarize(values) -> dict[str, float]:
    """mean, std (sample), best, worst and median of final fitness values."""
    x = _sample(values, "values")
    return {
        "mean": float(np.mean(x)),
        "std": _std(x),
        "best": float(np.min(x)),
        "worst": float(np.max(x)),
        "median": float(np.median(x)),
    }


def compare_table(results: Mapping[str, Mapping[str, Sequence[float]]], reference: str,
                  tie_tol: float = DEFAULT_TIE_TOL, alpha: float = DEFAULT_ALPHA) -> list[dict]:
    """Row per (algorithm, function) comparing against ``reference``.

    ``results[algorithm][function]`` holds that cell's final values.
    """
    if reference not in results:
        raise UsageError(f"reference algorithm {reference!r} not in results")
    rows = []
    for alg in sorted(results):
        if alg == reference:
            continue
        for fn in sorted(results[alg]):
            a, b = results[alg][fn], results[reference][fn]
            rs = wilcoxon_rank_sum(a, b, alpha)
            rows.append({
                "algorithm": alg,
                "function": fn,
                "bsw": bsw_compare(a, b, tie_tol),
                "p_value": rs.p_value,
                "wilcoxon": rs.verdict,
            })
    return rows
