"""Pareto dominance, non-dominated sorting and exact hypervolume.

All functions follow the minimisation convention. Objective sets are passed
as ``(n, M)`` arrays (anything ``np.asarray`` accepts).
"""

from __future__ import annotations

import numpy as np


def _as_points(points, n_obj: int | None = None) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return pts.reshape(0, n_obj if n_obj is not None else 0)
    if pts.ndim == 1:
        pts = pts[np.newaxis, :]
    if pts.ndim != 2:
        raise ValueError(f"expected a 2-d array of objective vectors, got shape {pts.shape}")
    if n_obj is not None and pts.shape[1] != n_obj:
        raise ValueError(f"objective vectors have length {pts.shape[1]}, expected {n_obj}")
    return pts


def dominates(a, b) -> bool:
    """Return True if ``a`` Pareto-dominates ``b``.

    ``a`` dominates ``b`` when it is no worse in every objective and strictly
    better in at least one. Equal vectors do not dominate each other.

    Raises:
        ValueError: if the vectors differ in length.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def dominance_matrix(points) -> np.ndarray:
    """Boolean ``(n, n)`` matrix with ``D[i, j]`` True iff point i dominates point j."""
    pts = _as_points(points)
    a = pts[:, np.newaxis, :]
    b = pts[np.newaxis, :, :]
    return np.all(a <= b, axis=2) & np.any(a < b, axis=2)


def nondominated(points) -> np.ndarray:
    """Indices of the points not dominated by any other point.

    Duplicates never dominate each other, so every copy of a non-dominated
    vector is retained.

    Raises:
        ValueError: on an empty input.
    """
    pts = _as_points(points)
    if len(pts) == 0:
        raise ValueError("nondominated() needs at least one point")
    dom = dominance_matrix(pts)
    return np.flatnonzero(~dom.any(axis=0))


def pareto_shells(points) -> list[list[int]]:
    """Rank points into successive Pareto shells.

    Shell 1 is the non-dominated set, shell 2 the non-dominated set of what
    remains, and so on. Indices within a shell are ascending.

    Raises:
        ValueError: on an empty input.
    """
    pts = _as_points(points)
    n = len(pts)
    if n == 0:
        raise ValueError("pareto_shells() needs at least one point")
    dom = dominance_matrix(pts)
    n_dominators = dom.sum(axis=0)
    remaining = np.ones(n, dtype=bool)
    shells = []
    while remaining.any():
        front = np.flatnonzero(remaining & (n_dominators == 0))
        shells.append(front.tolist())
        remaining[front] = False
        # removing a shell releases the points it dominated
        n_dominators = n_dominators - dom[front].sum(axis=0)
        n_dominators[~remaining] = -1
    return shells


def shell_index(shells: list[list[int]], n: int) -> np.ndarray:
    """Map each archive index to the (0-based) number of the shell holding it."""
    rank = np.empty(n, dtype=int)
    for lam, members in enumerate(shells):
        rank[members] = lam
    return rank


# --------------------------------------------------------------------------
# hypervolume
# --------------------------------------------------------------------------


def _effective(pts: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Points strictly below ``ref``, reduced to unique non-dominated vectors."""
    pts = pts[np.all(pts < ref, axis=1)]
    if len(pts) <= 1:
        return pts
    pts = np.unique(pts, axis=0)
    keep = ~dominance_matrix(pts).any(axis=0)
    return pts[keep]


def _hv2d(pts: np.ndarray, ref: np.ndarray) -> float:
    # mutually non-dominated, strictly below ref
    order = np.argsort(pts[:, 0], kind="stable")
    x = pts[order, 0]
    y = pts[order, 1]
    x_next = np.append(x[1:], ref[0])
    return float(np.sum((x_next - x) * (ref[1] - y)))


def _limit(p: np.ndarray, rest: np.ndarray) -> np.ndarray:
    """Limit set of ``rest`` by ``p``, reduced to its non-dominated part."""
    lim = np.maximum(rest, p)
    if len(lim) <= 1:
        return lim
    lim = np.unique(lim, axis=0)
    keep = ~dominance_matrix(lim).any(axis=0)
    return lim[keep]


def _wfg(pts: np.ndarray, ref: np.ndarray) -> float:
    # pts are mutually non-dominated and strictly below ref
    n, m = pts.shape
    if n == 0:
        return 0.0
    if n == 1:
        return float(np.prod(ref - pts[0]))
    if m == 2:
        return _hv2d(pts, ref)
    if n == 2:
        inter = np.prod(ref - np.maximum(pts[0], pts[1]))
        return float(np.prod(ref - pts[0]) + np.prod(ref - pts[1]) - inter)
    # descending in the last objective keeps limit sets small
    pts = pts[np.argsort(-pts[:, -1], kind="stable")]
    total = 0.0
    for k in range(n):
        p = pts[k]
        total += float(np.prod(ref - p))
        if k + 1 < n:
            total -= _wfg(_limit(p, pts[k + 1 :]), ref)
    return total


def hypervolume(points, ref) -> float:
    """Exact hypervolume dominated by ``points`` and bounded by ``ref``.

    Points that are not strictly below ``ref`` in every objective contribute
    nothing and are dropped. Uses a sorted sweep for two objectives and the
    WFG exclusive-volume recursion otherwise.
    """
    ref = np.asarray(ref, dtype=float).ravel()
    pts = _as_points(points, len(ref))
    if len(pts) == 0:
        return 0.0
    pts = _effective(pts, ref)
    if len(pts) == 0:
        return 0.0
    if len(ref) == 1:
        return float(ref[0] - pts[:, 0].min())
    return _wfg(pts, ref)


def hv_contributions(shell, ref) -> np.ndarray:
    """Exclusive hypervolume contribution of each member of a non-dominated shell.

    Entry i equals ``H(shell) - H(shell without i)``; duplicated members and
    members beyond ``ref`` get zero.

    Raises:
        ValueError: if any member of ``shell`` is dominated by another member.
    """
    ref = np.asarray(ref, dtype=float).ravel()
    pts = _as_points(shell, len(ref))
    n = len(pts)
    if n == 0:
        return np.zeros(0)
    if dominance_matrix(pts).any():
        raise ValueError("hv_contributions() requires a mutually non-dominated set")
    inside = np.all(pts < ref, axis=1)
    contrib = np.zeros(n)
    for i in np.flatnonzero(inside):
        others = np.delete(pts, i, axis=0)
        others = others[np.all(others < ref, axis=1)]
        own = float(np.prod(ref - pts[i]))
        if len(others) == 0:
            contrib[i] = own
            continue
        lim = _limit(pts[i], others)
        if len(ref) == 1:
            shared = float(ref[0] - lim[:, 0].min())
        else:
            shared = _wfg(lim, ref)
        contrib[i] = max(own - shared, 0.0)
    return contrib


def hypervolume_mc(points, ref, ideal, n_samples: int = 100_000, seed=None,
                   chunk: int = 50_000) -> tuple[float, float]:
    """Monte-Carlo hypervolume estimate over the box ``[ideal, ref]``.

    Returns:
        ``(estimate, standard_error)``.

    Raises:
        ValueError: if ``n_samples`` is not positive or a point lies below
            ``ideal``.
    """
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    ref = np.asarray(ref, dtype=float).ravel()
    ideal = np.asarray(ideal, dtype=float).ravel()
    pts = _as_points(points, len(ref))
    if len(pts) == 0:
        return 0.0, 0.0
    pts = pts[np.all(pts < ref, axis=1)]
    if len(pts) == 0:
        return 0.0, 0.0
    if np.any(pts < ideal):
        raise ValueError("all points must be weakly above the ideal point")
    rng = np.random.default_rng(seed)
    box = float(np.prod(ref - ideal))
    hits = 0
    done = 0
    while done < n_samples:
        size = min(chunk, n_samples - done)
        u = ideal + rng.random((size, len(ref))) * (ref - ideal)
        covered = np.zeros(size, dtype=bool)
        for p in pts:
            covered |= np.all(u >= p, axis=1)
        hits += int(covered.sum())
        done += size
    frac = hits / n_samples
    return box * frac, box * np.sqrt(frac * (1.0 - frac) / n_samples)
