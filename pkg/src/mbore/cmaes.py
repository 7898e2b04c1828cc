"""Box-constrained CMA-ES with a bi-population restart schedule.

Used as the inner optimiser for classifier acquisition functions, which are
cheap to evaluate in batches but piecewise constant (tree ensembles), so the
stopping rules favour frequent restarts over long runs.

The search space is the unit hypercube. Offspring outside it are resampled up
to ``MAX_RESAMPLES`` times and then clipped; the update uses the clipped
steps, so the distribution learns the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

MAX_RESAMPLES = 10
TOL_FUN = 1e-12
TOL_X = 1e-11
MAX_CONDITION = 1e14


def default_popsize(d: int) -> int:
    return 4 + int(np.floor(3.0 * np.log(d)))


@dataclass
class CmaResult:
    x: np.ndarray
    f: float
    n_evals: int
    n_runs: int


class _Budget:
    """Counts objective calls and never lets the caller exceed the limit."""

    def __init__(self, fun, limit):
        self.fun = fun
        self.limit = int(limit)
        self.used = 0
        self.best_x = None
        self.best_f = np.inf

    @property
    def left(self) -> int:
        return self.limit - self.used

    def __call__(self, X):
        X = X[: self.left]
        f = np.asarray(self.fun(X), dtype=float).reshape(len(X))
        self.used += len(X)
        # NaN never wins
        f = np.where(np.isnan(f), np.inf, f)
        i = int(np.argmin(f))
        if f[i] < self.best_f or self.best_x is None:
            self.best_f, self.best_x = float(f[i]), X[i].copy()
        return f


def _sample_in_box(rng, mean, sigma, BD, lam):
    d = len(mean)
    X = mean + sigma * rng.standard_normal((lam, d)) @ BD.T
    for _ in range(MAX_RESAMPLES):
        bad = np.any((X < 0.0) | (X > 1.0), axis=1)
        if not bad.any():
            break
        X[bad] = mean + sigma * rng.standard_normal((int(bad.sum()), d)) @ BD.T
    return np.clip(X, 0.0, 1.0)


def _run(budget: _Budget, rng, d, lam, sigma):
    """One CMA-ES run from a uniform random mean; stops on budget or stagnation."""
    mu = lam // 2
    w = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    w /= w.sum()
    mueff = 1.0 / np.sum(w**2)

    cc = (4 + mueff / d) / (d + 4 + 2 * mueff / d)
    cs = (mueff + 2) / (d + mueff + 5)
    c1 = 2 / ((d + 1.3) ** 2 + mueff)
    cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((d + 2) ** 2 + mueff))
    damps = 1 + 2 * max(0.0, np.sqrt((mueff - 1) / (d + 1)) - 1) + cs
    chi_n = np.sqrt(d) * (1 - 1 / (4 * d) + 1 / (21 * d**2))

    mean = rng.random(d)
    pc, ps = np.zeros(d), np.zeros(d)
    C = np.eye(d)
    B, D = np.eye(d), np.ones(d)
    history_len = 10 + int(np.ceil(30 * d / lam))
    history: list[float] = []
    gen = 0

    while budget.left > 0:
        X = _sample_in_box(rng, mean, sigma, B * D, lam)
        f = budget(X)
        if len(f) < lam:
            return
        order = np.argsort(f, kind="stable")
        Y = (X[order[:mu]] - mean) / sigma
        y_w = w @ Y
        mean = mean + sigma * y_w

        inv_sqrt_C_yw = B @ ((B.T @ y_w) / D)
        ps = (1 - cs) * ps + np.sqrt(cs * (2 - cs) * mueff) * inv_sqrt_C_yw
        gen += 1
        hsig = np.linalg.norm(ps) / np.sqrt(1 - (1 - cs) ** (2 * gen)) / chi_n < 1.4 + 2 / (d + 1)
        pc = (1 - cc) * pc + hsig * np.sqrt(cc * (2 - cc) * mueff) * y_w
        C = ((1 - c1 - cmu) * C
             + c1 * (np.outer(pc, pc) + (1 - hsig) * cc * (2 - cc) * C)
             + cmu * (Y.T * w) @ Y)
        sigma *= np.exp(cs / damps * (np.linalg.norm(ps) / chi_n - 1))

        C = np.triu(C) + np.triu(C, 1).T
        evals, B = np.linalg.eigh(C)
        if evals.min() <= 0 or evals.max() / evals.min() > MAX_CONDITION:
            return
        D = np.sqrt(evals)

        history.append(float(f[order[0]]))
        recent = history[-history_len:]
        if len(history) >= history_len and max(recent) - min(recent) < TOL_FUN and np.ptp(f) < TOL_FUN:
            return
        if sigma * max(np.max(np.abs(pc)), np.max(D)) < TOL_X:
            return
        if not np.isfinite(sigma):
            return


def cma_minimise(fun: Callable[[np.ndarray], np.ndarray], d: int, budget: int,
                 n_restarts: int = 10, sigma0: float = 0.25, seed=None) -> CmaResult:
    """Minimise a batched objective over ``[0, 1]^d`` within ``budget`` point evaluations.

    The first run uses the default population ``4 + floor(3 ln d)``. Restarts
    then alternate between a doubling large population started with
    ``sigma0`` and a small population with a randomly shrunk step size, in the
    style of bi-population CMA-ES. Each run starts from a uniform random mean.

    Args:
        fun: maps an ``(n, d)`` array to ``n`` objective values.
        d: dimension.
        budget: maximum total number of rows passed to ``fun``.
        n_restarts: restarts after the first run.
        sigma0: initial step size, relative to the unit box.
        seed: seed for the internal generator.

    Returns:
        The best point seen, its value, the number of evaluations used and the
        number of runs started.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    rng = np.random.default_rng(seed)
    counter = _Budget(fun, budget)
    lam_default = default_popsize(d)
    n_large = 0
    lam_large = lam_default
    n_runs = 0
    for r in range(n_restarts + 1):
        if counter.left <= 0:
            break
        if r == 0:
            lam, sigma = lam_default, sigma0
        elif r % 2 == 1:
            n_large += 1
            lam_large = lam_default * 2**n_large
            lam, sigma = lam_large, sigma0
        else:
            u = rng.random()
            lam = max(lam_default, int(lam_default * (0.5 * lam_large / lam_default) ** (u * u)))
            sigma = sigma0 * 10.0 ** (-2.0 * rng.random())
        n_runs += 1
        _run(counter, rng, d, lam, sigma)
    return CmaResult(counter.best_x, counter.best_f, counter.used, n_runs)
