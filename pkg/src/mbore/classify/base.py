"""Shared classifier plumbing: validation, log loss, clamping, serialisation."""

from __future__ import annotations

import json

import numpy as np

P_CLAMP = 1e-6


class TrainingError(ValueError):
    """Raised when a classifier cannot be trained on the given labels."""


def sigmoid(a):
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    e = np.exp(a[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def log_loss(z, p) -> float:
    """Mean binary cross-entropy of probabilities ``p`` against labels ``z``.

    Raises:
        ValueError: if lengths differ or any probability is outside (0, 1).
    """
    z = np.asarray(z, dtype=float).ravel()
    p = np.asarray(p, dtype=float).ravel()
    if z.shape != p.shape:
        raise ValueError(f"length mismatch: {z.shape} vs {p.shape}")
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    return float(-np.mean(z * np.log(p) + (1.0 - z) * np.log1p(-p)))


def check_dataset(X, z) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    z = np.asarray(z).ravel()
    if len(X) != len(z):
        raise ValueError(f"{len(X)} rows but {len(z)} labels")
    if not np.all(np.isfinite(X)):
        raise ValueError("training inputs contain NaN or infinite values")
    if not np.all((z == 0) | (z == 1)):
        raise ValueError("labels must be 0 or 1")
    if z.min() == z.max():
        raise TrainingError("both classes must be present to train a classifier")
    return X, z.astype(float)


def canonical_order(X: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Row order that depends only on the multiset of (x, z) pairs."""
    keys = [z] + [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(keys[::-1])


class ClassifierModel:
    """A fitted probabilistic classifier mapping the unit cube to (0, 1)."""

    kind: str = ""

    def __init__(self, n_features: int, config, train_loss_trace):
        self.n_features = int(n_features)
        self.config = config
        self.train_loss_trace = np.asarray(train_loss_trace, dtype=float)

    def _check_inputs(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise ValueError(f"model expects {self.n_features} features, got {X.shape[1]}")
        return X

    def decision_function(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict_proba(self, X) -> np.ndarray:
        """Class-1 probability for each row of ``X``, clamped to [1e-6, 1 - 1e-6]."""
        X = self._check_inputs(X)
        return np.clip(sigmoid(self.decision_function(X)), P_CLAMP, 1.0 - P_CLAMP)

    # subclasses provide _state() / _from_state()
    def to_json(self) -> str:
        blob = {
            "kind": self.kind,
            "n_features": self.n_features,
            "config": self.config.to_dict(),
            "train_loss_trace": self.train_loss_trace.tolist(),
            "state": self._state(),
        }
        return json.dumps(blob)
