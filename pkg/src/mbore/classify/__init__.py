"""Probabilistic classifiers trained under log loss.

A classifier fitted to separate the best fraction of the archive from the
rest estimates the class-1 posterior, which is proportional to the
probability of improvement; maximising it selects the next evaluation.
"""

from __future__ import annotations

import json

import numpy as np

from .base import ClassifierModel, TrainingError, log_loss
from .gbt import GbtConfig, GbtModel, fit_gbt
from .mlp import MlpConfig, MlpModel, fit_mlp

__all__ = [
    "ClassifierModel",
    "GbtConfig",
    "GbtModel",
    "MlpConfig",
    "MlpModel",
    "TrainingError",
    "fit",
    "from_json",
    "log_loss",
    "predict_proba",
]

KINDS = ("GBT", "MLP")


def fit(kind: str, X, z, config=None, seed=None) -> ClassifierModel:
    """Train a classifier of the given kind (``"GBT"`` or ``"MLP"``).

    Raises:
        TrainingError: if ``z`` contains a single class.
        ValueError: on unknown kinds or non-finite inputs.
    """
    kind = str(kind).upper()
    if kind in ("GBT", "XGB"):
        return fit_gbt(X, z, config, seed)
    if kind == "MLP":
        return fit_mlp(X, z, config, seed)
    raise ValueError(f"unknown classifier kind {kind!r}; expected one of {KINDS}")


def predict_proba(model: ClassifierModel, x) -> np.ndarray | float:
    """Class-1 probability; a scalar for a single point, else one value per row."""
    x = np.asarray(x, dtype=float)
    p = model.predict_proba(x)
    return float(p[0]) if x.ndim == 1 else p


def from_json(text: str) -> ClassifierModel:
    """Rebuild a model written by ``ClassifierModel.to_json``."""
    blob = json.loads(text)
    trace = np.asarray(blob["train_loss_trace"], dtype=float)
    if blob["kind"] == "GBT":
        cfg = GbtConfig(**blob["config"])
        return GbtModel._from_state(blob["n_features"], cfg, trace, blob["state"])
    if blob["kind"] == "MLP":
        cfg = MlpConfig(**blob["config"])
        return MlpModel._from_state(blob["n_features"], cfg, trace, blob["state"])
    raise ValueError(f"unknown model kind {blob['kind']!r}")
