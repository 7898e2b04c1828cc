"""Maximin Latin hypercube designs."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist


def latin_hypercube(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """One random Latin hypercube: a point in every stratum [j/n, (j+1)/n) of each column."""
    strata = np.argsort(rng.random((n, d)), axis=0)
    return (strata + rng.random((n, d))) / n


def min_distance(design: np.ndarray) -> float:
    if len(design) < 2:
        return np.inf
    return float(pdist(design).min())


def lhs_maximin(n: int, d: int, n_candidates: int = 100, seed=None) -> np.ndarray:
    """Best of ``n_candidates`` random Latin hypercubes by minimum pairwise distance.

    Ties keep the earliest candidate, so the result is deterministic for a
    given seed.
    """
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    rng = np.random.default_rng(seed)
    best, best_dist = None, -np.inf
    for _ in range(max(1, n_candidates)):
        cand = latin_hypercube(n, d, rng)
        dist = min_distance(cand)
        if dist > best_dist:
            best, best_dist = cand, dist
    return np.minimum(best, np.nextafter(1.0, 0.0))
