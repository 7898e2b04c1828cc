"""Zero-mean Gaussian process with an ARD Matérn-5/2 kernel, plus PI and EI.

Inputs are expected in the unit hypercube. Targets are standardised before
fitting; hyperparameters are found by maximising the log marginal likelihood
with multi-start L-BFGS-B inside the box given by their uniform priors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.optimize import minimize
from scipy.stats import norm

SQRT5 = np.sqrt(5.0)
JITTER_START = 1e-6
JITTER_MAX = 1e-2
OUTPUT_SCALE_BOUNDS = (1e-4, 10.0)
LENGTHSCALE_MIN = 1e-4
VAR_FLOOR = 1e-12


class GpNumericalError(ArithmeticError):
    """Kernel matrix stayed non-positive-definite at the largest jitter."""


@dataclass(frozen=True)
class KernelHyperparameters:
    lengthscales: np.ndarray
    output_scale: float

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        object.__setattr__(self, "lengthscales", ls)
        if np.any(ls <= 0) or self.output_scale <= 0:
            raise ValueError("kernel hyperparameters must be positive")

    @staticmethod
    def bounds(d: int):
        """Box of the uniform priors: lengthscales, then output scale."""
        return [(LENGTHSCALE_MIN, np.sqrt(d))] * d + [OUTPUT_SCALE_BOUNDS]


def _scaled_dist(A, B, lengthscales):
    A = np.asarray(A, dtype=float) / lengthscales
    B = np.asarray(B, dtype=float) / lengthscales
    sq = np.sum(A**2, 1)[:, None] + np.sum(B**2, 1)[None, :] - 2.0 * A @ B.T
    return np.sqrt(np.maximum(sq, 0.0))


def matern52_matrix(A, B, theta: KernelHyperparameters) -> np.ndarray:
    r = _scaled_dist(np.atleast_2d(A), np.atleast_2d(B), theta.lengthscales)
    s = SQRT5 * r
    return theta.output_scale**2 * (1.0 + s + s**2 / 3.0) * np.exp(-s)


def matern52(x, x_prime, theta: KernelHyperparameters) -> float:
    """Matérn-5/2 covariance between two points."""
    diff = (np.asarray(x, dtype=float) - np.asarray(x_prime, dtype=float)) / theta.lengthscales
    s = SQRT5 * float(np.sqrt(np.sum(diff**2)))
    return float(theta.output_scale**2 * (1.0 + s + s**2 / 3.0) * np.exp(-s))


def _cholesky(K):
    jitter = JITTER_START
    n = len(K)
    while jitter <= JITTER_MAX * (1 + 1e-9):
        try:
            return np.linalg.cholesky(K + jitter * np.eye(n)), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise GpNumericalError("Cholesky factorisation failed even with maximum jitter")


def _neg_lml_and_grad(log_params, X, y):
    d = X.shape[1]
    ls = np.exp(log_params[:d])
    sigma = np.exp(log_params[d])
    diff = X[:, None, :] - X[None, :, :]
    sq_terms = (diff / ls) ** 2
    r = np.sqrt(np.sum(sq_terms, axis=2))
    s = SQRT5 * r
    e = np.exp(-s)
    K = sigma**2 * (1.0 + s + s**2 / 3.0) * e
    try:
        L, _ = _cholesky(K)
    except GpNumericalError:
        return 1e25, np.zeros_like(log_params)
    alpha = cho_solve((L, True), y)
    n = len(y)
    nlml = 0.5 * y @ alpha + np.sum(np.log(np.diag(L))) + 0.5 * n * np.log(2 * np.pi)
    inner = np.outer(alpha, alpha) - cho_solve((L, True), np.eye(n))
    common = sigma**2 * (5.0 / 3.0) * (1.0 + s) * e
    grad = np.empty_like(log_params)
    for k in range(d):
        grad[k] = -0.5 * np.sum(inner * common * sq_terms[:, :, k])
    grad[d] = -0.5 * np.sum(inner * 2.0 * K)
    return float(nlml), grad


@dataclass
class GpModel:
    """A fitted GP; immutable by convention once returned from :func:`gp_fit`."""

    X_train: np.ndarray
    y_train: np.ndarray  # standardised
    y_mean: float
    y_std: float
    theta: KernelHyperparameters
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float
    log_marginal_likelihood: float

    @classmethod
    def condition(cls, X, y_std_scale, theta, y_mean=0.0, y_std=1.0) -> "GpModel":
        """Condition on already-standardised targets with fixed hyperparameters."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y_std_scale, dtype=float)
        K = matern52_matrix(X, X, theta)
        L, jitter = _cholesky(K)
        alpha = cho_solve((L, True), y)
        n = len(y)
        lml = -0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * np.log(2 * np.pi)
        return cls(X, y, float(y_mean), float(y_std), theta, L, alpha, jitter, float(lml))

    def posterior(self, X, standardised: bool = False):
        """Posterior mean and variance at the rows of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        ks = matern52_matrix(X, self.X_train, self.theta)
        mean = ks @ self.alpha
        v = solve_triangular(self.chol, ks.T, lower=True)
        var = self.theta.output_scale**2 - np.sum(v**2, axis=0)
        var = np.maximum(var, VAR_FLOOR)
        if standardised:
            return mean, var
        return self.y_mean + self.y_std * mean, var * self.y_std**2

    def posterior_with_grad(self, x):
        """Mean, variance and their gradients at a single point, on the original scale.

        The variance gradient is zero where the variance sits at its floor.
        """
        x = np.asarray(x, dtype=float).ravel()
        ls2 = self.theta.lengthscales**2
        diff = x[None, :] - self.X_train
        s = SQRT5 * np.sqrt(np.sum(diff**2 / ls2, axis=1))
        e = np.exp(-s)
        sig2 = self.theta.output_scale**2
        k = sig2 * (1.0 + s + s**2 / 3.0) * e
        # dk/dx, finite at r = 0
        dk = -(sig2 * 5.0 / 3.0 * (1.0 + s) * e)[:, None] * diff / ls2
        mean = k @ self.alpha
        dmean = dk.T @ self.alpha
        v = solve_triangular(self.chol, k, lower=True)
        w = solve_triangular(self.chol.T, v, lower=False)
        var = sig2 - v @ v
        dvar = -2.0 * dk.T @ w
        if var < VAR_FLOOR:
            var, dvar = VAR_FLOOR, np.zeros_like(dvar)
        return (self.y_mean + self.y_std * mean, var * self.y_std**2,
                self.y_std * dmean, dvar * self.y_std**2)


def standardise(y):
    y = np.asarray(y, dtype=float).ravel()
    mu = float(y.mean())
    sd = float(y.std())
    if not sd > 0:
        return np.zeros_like(y), mu, 1.0
    return (y - mu) / sd, mu, sd


def gp_fit(X, y, n_restarts: int = 10, seed=None, maxiter: int = 200) -> GpModel:
    """Fit hyperparameters by multi-start maximisation of the log marginal likelihood.

    Each restart starts from a point drawn uniformly from the prior box and
    runs bounded L-BFGS-B on the log-hyperparameters; the best optimum wins.

    Raises:
        ValueError: with fewer than two training points.
        GpNumericalError: if the winning kernel matrix cannot be factorised.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if len(X) < 2:
        raise ValueError("gp_fit needs at least two observations")
    ys, mu, sd = standardise(y)
    d = X.shape[1]
    box = np.array(KernelHyperparameters.bounds(d))
    log_box = np.log(box)
    rng = np.random.default_rng(seed)
    best_x, best_f = None, np.inf
    for _ in range(max(1, n_restarts)):
        x0 = np.log(rng.uniform(box[:, 0], box[:, 1]))
        f0, _ = _neg_lml_and_grad(x0, X, ys)
        res = minimize(_neg_lml_and_grad, x0, args=(X, ys), jac=True, method="L-BFGS-B",
                       bounds=log_box, options={"maxiter": maxiter})
        cand, fc = (res.x, res.fun) if res.fun <= f0 else (x0, f0)
        if fc < best_f:
            best_x, best_f = np.clip(cand, log_box[:, 0], log_box[:, 1]), fc
    theta = KernelHyperparameters(np.exp(best_x[:d]), float(np.exp(best_x[d])))
    return GpModel.condition(X, ys, theta, mu, sd)


def gp_posterior(model: GpModel, x, standardised: bool = False):
    """Posterior ``(mean, variance)``; scalars for a single point."""
    x = np.asarray(x, dtype=float)
    mean, var = model.posterior(x, standardised)
    if x.ndim == 1:
        return float(mean[0]), float(var[0])
    return mean, var


def pi_value(mean, variance, tau):
    """Probability that the prediction falls below ``tau``.

    Where the variance is not positive the value is the indicator
    ``mean < tau``.
    """
    mean, variance = np.broadcast_arrays(np.asarray(mean, float), np.asarray(variance, float))
    out = np.array(mean < tau, dtype=float)
    ok = variance > 0
    sd = np.sqrt(variance[ok])
    out[ok] = norm.cdf((tau - mean[ok]) / sd)
    return float(out) if out.ndim == 0 else out


def ei_value(mean, variance, tau):
    """Expected improvement below ``tau``; ``max(tau - mean, 0)`` when the variance is not positive."""
    mean, variance = np.broadcast_arrays(np.asarray(mean, float), np.asarray(variance, float))
    out = np.array(np.maximum(tau - mean, 0.0), dtype=float)
    ok = variance > 0
    sd = np.sqrt(variance[ok])
    s = (tau - mean[ok]) / sd
    out[ok] = np.maximum(sd * (s * norm.cdf(s) + norm.pdf(s)), 0.0)
    return float(out) if out.ndim == 0 else out
