"""Run-quality indicators on normalised objective space.

Objectives are mapped affinely so that the ideal point goes to the origin and
the reference point to the ones vector; both indicators are computed there.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .pareto import hypervolume, nondominated


def normalise_front(F, ideal, ref) -> np.ndarray:
    """Affine map ``(f - ideal) / (ref - ideal)`` applied per objective.

    Raises:
        ValueError: if any coordinate of ``ref`` does not exceed ``ideal``.
    """
    F = np.asarray(F, dtype=float)
    ideal = np.asarray(ideal, dtype=float)
    ref = np.asarray(ref, dtype=float)
    span = ref - ideal
    if np.any(span <= 0):
        raise ValueError("reference point must exceed the ideal point in every objective")
    return (F - ideal) / span


def hv_indicator(F, ideal, ref) -> float:
    """Hypervolume of the normalised archive against the ones vector.

    Points that are not strictly below 1 in every objective contribute nothing.
    """
    Fn = np.atleast_2d(normalise_front(F, ideal, ref))
    if Fn.size == 0:
        return 0.0
    inside = Fn[np.all(Fn < 1.0, axis=1)]
    if len(inside) == 0:
        return 0.0
    front = inside[nondominated(inside)]
    return hypervolume(front, np.ones(Fn.shape[1]))


def igd_plus(A, Z) -> float:
    """Mean over ``Z`` of the dominance-aware distance to the nearest point of ``A``.

    Args:
        A: attained points, shape ``(n, M)``, already normalised.
        Z: reference set, shape ``(r, M)``, same normalisation.

    Raises:
        ValueError: on an empty set or mismatched objective counts.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if A.size == 0 or Z.size == 0:
        raise ValueError("IGD+ needs non-empty attained and reference sets")
    if A.shape[1] != Z.shape[1]:
        raise ValueError(f"objective counts differ: {A.shape[1]} vs {Z.shape[1]}")
    diff = np.maximum(A[None, :, :] - Z[:, None, :], 0.0)
    dplus = np.sqrt(np.sum(diff**2, axis=2))
    return float(dplus.min(axis=1).mean())


def load_reference_set(path, n_obj: int | None = None) -> np.ndarray:
    """Read a reference set: one point per line, whitespace-separated reals."""
    Z = np.atleast_2d(np.loadtxt(Path(path), dtype=float, ndmin=2))
    if Z.size == 0:
        raise ValueError(f"reference set {path} is empty")
    if n_obj is not None and Z.shape[1] != n_obj:
        raise ValueError(f"reference set {path} has {Z.shape[1]} objectives, expected {n_obj}")
    return Z
