"""Scalarisation of an archive of objective vectors.

Every scalariser returns values in a smaller-is-better orientation: the
hypervolume-based scores and DomRank, which are naturally larger-is-better,
are negated here so that downstream labelling and surrogate fitting always
minimise.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field

import numpy as np

from .pareto import dominance_matrix, hv_contributions, hypervolume, pareto_shells

RHO = 0.05
REF_MARGIN = 0.1

# Weight-set sizes used for the augmented Tchebycheff scalariser, by M.
WEIGHT_COUNTS = {2: 100, 3: 105, 4: 120, 5: 126, 6: 132, 7: 112, 8: 156, 9: 90, 10: 275}


class Scalariser(str, enum.Enum):
    AT = "AT"
    HYPI = "HYPI"
    DOMRANK = "DOMRANK"
    PHC = "PHC"

    @classmethod
    def parse(cls, value) -> "Scalariser":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper()
        aliases = {"DR": "DOMRANK", "HYPERVOLUME": "HYPI", "PAREGO": "AT"}
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class ScalarisedArchive:
    """Scalar fitness for every archive member (smaller is better)."""

    g: np.ndarray
    scalariser: Scalariser
    weight: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if not np.all(np.isfinite(self.g)):
            raise ValueError("scalarised values must be finite")

    def __len__(self) -> int:
        return len(self.g)


def normalise_archive(F) -> np.ndarray:
    """Column-wise min-max scaling of an objective matrix to [0, 1].

    A constant column (including the single-row case) maps to zeros.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    lo = F.min(axis=0)
    span = F.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (F - lo) / safe, 0.0)


# --------------------------------------------------------------------------
# weight vectors
# --------------------------------------------------------------------------


def default_weight_count(n_obj: int) -> int:
    if n_obj in WEIGHT_COUNTS:
        return WEIGHT_COUNTS[n_obj]
    return max(n_obj, 100)


def _riesz_energy_rows(W: np.ndarray, s: float) -> np.ndarray:
    d = np.linalg.norm(W[:, None, :] - W[None, :, :], axis=2)
    np.fill_diagonal(d, np.inf)
    return np.sum(d ** -s, axis=1)


@functools.lru_cache(maxsize=32)
def _weights_cached(n_obj: int, n: int, seed: int, n_passes: int) -> np.ndarray:
    if n_obj == 2:
        w = np.linspace(0.0, 1.0, n)
        return np.column_stack([w, 1.0 - w])

    rng = np.random.default_rng(seed)
    pool = rng.dirichlet(np.ones(n_obj), size=max(40 * n, 4000))
    chosen = list(np.eye(n_obj))
    # greedy farthest-point selection, seeded with the simplex vertices
    dmin = np.min(np.linalg.norm(pool[:, None, :] - np.eye(n_obj)[None], axis=2), axis=1)
    while len(chosen) < n:
        j = int(np.argmax(dmin))
        chosen.append(pool[j])
        dmin = np.minimum(dmin, np.linalg.norm(pool - pool[j], axis=1))
    W = np.array(chosen)

    # exchange refinement of the Riesz s-energy; vertices stay fixed
    s = float(n_obj + 1)
    n_try = 64
    for _ in range(n_passes):
        for i in range(n_obj, n):
            others = np.delete(W, i, axis=0)
            cand = pool[rng.integers(0, len(pool), n_try)]
            cand = np.vstack([W[i], cand])
            dist = np.linalg.norm(cand[:, None, :] - others[None], axis=2)
            energy = np.sum(np.maximum(dist, 1e-12) ** -s, axis=1)
            W[i] = cand[int(np.argmin(energy))]
    W = np.clip(W, 0.0, None)
    return W / W.sum(axis=1, keepdims=True)


def generate_weights(n_obj: int, n: int | None = None, seed: int = 0,
                     n_passes: int = 3) -> np.ndarray:
    """Approximately evenly spread weight vectors on the unit simplex.

    Two objectives use exact even spacing. For more objectives the set is
    built by farthest-point selection from a random pool, starting from the
    simplex vertices, then improved by exchanging points to lower the
    pairwise Riesz s-energy. The output is deterministic for a given seed.

    Returns:
        ``(n, n_obj)`` array whose rows are non-negative and sum to one.
    """
    if n_obj < 2:
        raise ValueError("weight vectors need at least two objectives")
    if n is None:
        n = default_weight_count(n_obj)
    if n < n_obj:
        raise ValueError(f"need at least {n_obj} weight vectors, got {n}")
    return _weights_cached(int(n_obj), int(n), int(seed), int(n_passes)).copy()


# --------------------------------------------------------------------------
# scalarisers
# --------------------------------------------------------------------------


def at_scalarise(fbar_row, w, rho: float = RHO) -> float:
    """Augmented Tchebycheff value of one normalised objective vector."""
    wf = np.asarray(w, dtype=float) * np.asarray(fbar_row, dtype=float)
    return float(np.max(wf) + rho * np.sum(wf))


def at_scalarise_archive(F, w, rho: float = RHO) -> ScalarisedArchive:
    """Normalise the archive and apply the augmented Tchebycheff function row-wise."""
    w = np.asarray(w, dtype=float)
    wf = normalise_archive(F) * w
    g = wf.max(axis=1) + rho * wf.sum(axis=1)
    return ScalarisedArchive(g, Scalariser.AT, weight=w)


def _hv_frame(F, ref):
    """Objectives and reference point used for the internal hypervolume calls."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if ref is None:
        return normalise_archive(F), np.full(F.shape[1], 1.0 + REF_MARGIN)
    return F, np.asarray(ref, dtype=float)


def hypi_scalarise(F, ref=None) -> ScalarisedArchive:
    """Hypervolume-improvement scalarisation.

    Each solution scores the hypervolume of itself joined with the first
    shell that holds none of its dominators. Because a member of shell k is
    dominated by some member of every earlier shell, that is always its own
    shell. With ``ref=None`` the archive is min-max normalised and the
    reference point is ``1.1`` in every objective.
    """
    F, ref = _hv_frame(F, ref)
    shells = pareto_shells(F)
    dom = dominance_matrix(F)
    raw = np.empty(len(F))
    shell_hv = [hypervolume(F[s], ref) for s in shells]
    for i in range(len(F)):
        for lam, members in enumerate(shells):
            if not dom[members, i].any():
                if i in members:
                    raw[i] = shell_hv[lam]
                else:
                    raw[i] = hypervolume(np.vstack([F[members], F[i]]), ref)
                break
    return ScalarisedArchive(-raw, Scalariser.HYPI)


def domrank_scalarise(F) -> ScalarisedArchive:
    """Dominance-ranking scalarisation: one minus the fraction of dominators."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    t = len(F)
    if t < 2:
        raise ValueError("DomRank needs at least two solutions")
    n_dom = dominance_matrix(F).sum(axis=0)
    raw = 1.0 - n_dom / (t - 1)
    return ScalarisedArchive(-raw, Scalariser.DOMRANK)


def phc_raw(F, ref) -> np.ndarray:
    """Pareto hypervolume contribution scores (larger is better), no normalisation."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    ref = np.asarray(ref, dtype=float)
    shells = pareto_shells(F)
    contrib = np.empty(len(F))
    best = np.empty(len(shells))
    for lam, members in enumerate(shells):
        # copies of one vector share its contribution so that dominance stays strict
        uniq, inverse = np.unique(F[members], axis=0, return_inverse=True)
        v = hv_contributions(uniq, ref)[np.ravel(inverse)]
        contrib[members] = v
        best[lam] = v.max()
    # tail[lam] = sum of the best contributions of shells after lam
    tail = np.concatenate([np.cumsum(best[::-1])[::-1][1:], [0.0]])
    raw = np.empty(len(F))
    for lam, members in enumerate(shells):
        raw[members] = contrib[members] + tail[lam]
    return raw


def phc_scalarise(F, ref=None) -> ScalarisedArchive:
    """Pareto hypervolume contribution scalarisation.

    A solution scores its exclusive contribution to its own shell plus the
    largest contribution found in each later shell.
    """
    F, ref = _hv_frame(F, ref)
    return ScalarisedArchive(-phc_raw(F, ref), Scalariser.PHC)


def scalarise(F, scalariser, rng: np.random.Generator | None = None,
              weights: np.ndarray | None = None, rho: float = RHO) -> ScalarisedArchive:
    """Scalarise an archive with the named method.

    AT draws one weight vector uniformly from ``weights`` (default: the
    standard set for this M) using ``rng``.
    """
    kind = Scalariser.parse(scalariser)
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if kind is Scalariser.AT:
        if weights is None:
            weights = generate_weights(F.shape[1])
        rng = rng if rng is not None else np.random.default_rng()
        w = weights[rng.integers(len(weights))]
        return at_scalarise_archive(F, w, rho)
    if kind is Scalariser.HYPI:
        return hypi_scalarise(F)
    if kind is Scalariser.DOMRANK:
        return domrank_scalarise(F)
    return phc_scalarise(F)
