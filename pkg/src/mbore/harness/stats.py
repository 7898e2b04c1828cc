"""Paired one-sided Wilcoxon signed-rank test and Holm's step-down correction."""

from __future__ import annotations

import numpy as np
from scipy.stats import norm, rankdata

EXACT_MAX_N = 20


def _signed_rank_stat(a, b):
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    d = d[d != 0.0]
    ranks = rankdata(np.abs(d))  # midranks for ties
    return d, ranks


def exact_null_distribution(doubled_ranks) -> np.ndarray:
    """Counts of each achievable doubled positive-rank sum over all ``2^n`` sign patterns.

    Midranks are multiples of one half, so doubling makes every rank an integer
    and the distribution a simple subset-sum count.
    """
    doubled_ranks = np.asarray(doubled_ranks, dtype=np.int64)
    counts = np.zeros(int(doubled_ranks.sum()) + 1, dtype=float)
    counts[0] = 1.0
    for r in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: len(counts) - r]
        counts += shifted
    return counts


def wilcoxon_signed_rank_one_sided(a, b) -> float:
    """p-value for the alternative that ``a`` tends to exceed ``b``.

    Pairs with zero difference are dropped. Up to ``EXACT_MAX_N`` remaining
    pairs the p-value is exact (ties handled through midranks); above that a
    normal approximation with tie-corrected variance is used, without
    continuity correction.

    Returns:
        ``P(W+ >= observed)`` under the symmetric null, or 1 when every
        difference is zero.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("a and b must be paired 1-D vectors of equal length")
    d, ranks = _signed_rank_stat(a, b)
    n = len(d)
    if n == 0:
        return 1.0
    w_plus = ranks[d > 0].sum()
    if n <= EXACT_MAX_N:
        doubled = np.rint(2 * ranks).astype(np.int64)
        counts = exact_null_distribution(doubled)
        observed = int(np.rint(2 * w_plus))
        return float(counts[observed:].sum() / 2.0**n)
    _, tie_sizes = np.unique(ranks, return_counts=True)
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_sizes**3 - tie_sizes) / 48.0
    if var <= 0:
        return 1.0
    return float(norm.sf((w_plus - mean) / np.sqrt(var)))


def holm_bonferroni(pvalues, alpha: float = 0.05) -> np.ndarray:
    """Holm's step-down rejections, returned in the input order.

    The i-th smallest p-value (1-based) is rejected while it is at most
    ``alpha / (m - i + 1)``; testing stops at the first failure.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    p = np.asarray(pvalues, dtype=float).ravel()
    m = len(p)
    reject = np.zeros(m, dtype=bool)
    for i, idx in enumerate(np.argsort(p, kind="stable")):
        if p[idx] <= alpha / (m - i):
            reject[idx] = True
        else:
            break
    return reject
