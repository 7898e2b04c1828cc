"""Multi-layer perceptron classifier trained with full-batch Adam on log loss."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .base import ClassifierModel, check_dataset

_ACTIVATIONS = ("relu", "tanh")


@dataclass(frozen=True)
class MlpConfig:
    layers: tuple[int, ...] = field(default=(32, 32))
    activation: str = "relu"
    epochs: int = 1000
    batch_size: int | None = None  # None: full batch
    step_size: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(int(w) for w in self.layers))
        if len(self.layers) < 1 or min(self.layers) < 1:
            raise ValueError("an MLP needs at least one hidden layer of positive width")
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"activation must be one of {_ACTIVATIONS}")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["layers"] = list(self.layers)
        return d


def _act(a, kind):
    return np.maximum(a, 0.0) if kind == "relu" else np.tanh(a)


def _act_grad(a, out, kind):
    return (a > 0).astype(float) if kind == "relu" else 1.0 - out**2


def _forward(params, X, kind):
    pre, post = [], [X]
    h = X
    for W, b in params[:-1]:
        a = h @ W + b
        h = _act(a, kind)
        pre.append(a)
        post.append(h)
    W, b = params[-1]
    return (h @ W + b).ravel(), pre, post


class MlpModel(ClassifierModel):
    kind = "MLP"

    def __init__(self, n_features, config, train_loss_trace, params):
        super().__init__(n_features, config, train_loss_trace)
        self.params = [(np.asarray(W, dtype=float), np.asarray(b, dtype=float)) for W, b in params]

    def decision_function(self, X) -> np.ndarray:
        return _forward(self.params, X, self.config.activation)[0]

    def _state(self) -> dict:
        return {"params": [[W.tolist(), b.tolist()] for W, b in self.params]}

    @classmethod
    def _from_state(cls, n_features, config, trace, state) -> "MlpModel":
        params = [(np.array(W, dtype=float).reshape(-1, len(b)), np.array(b, dtype=float))
                  for W, b in state["params"]]
        return cls(n_features, config, trace, params)


def _init_params(sizes, rng):
    # uniform fan-in scaling, bound 1/sqrt(fan_in) for weights and biases
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        W = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        b = rng.uniform(-bound, bound, size=fan_out)
        params.append((W, b))
    return params


def fit_mlp(X, z, config: MlpConfig | None = None, seed=None) -> MlpModel:
    """Train an MLP with a sigmoid output by minimising the mean log loss."""
    cfg = config or MlpConfig()
    X, z = check_dataset(X, z)
    rng = np.random.default_rng(seed)
    sizes = [X.shape[1], *cfg.layers, 1]
    params = _init_params(sizes, rng)
    m = [(np.zeros_like(W), np.zeros_like(b)) for W, b in params]
    v = [(np.zeros_like(W), np.zeros_like(b)) for W, b in params]
    n = len(z)
    batch = n if cfg.batch_size is None else min(cfg.batch_size, n)
    trace = []
    step = 0
    for _ in range(cfg.epochs):
        order = np.arange(n) if batch == n else rng.permutation(n)
        for start in range(0, n, batch):
            rows = order[start:start + batch]
            loss, grads = _loss_and_grads(params, X[rows], z[rows], cfg.activation)
            step += 1
            lr_t = cfg.step_size * np.sqrt(1 - cfg.beta2**step) / (1 - cfg.beta1**step)
            new_params = []
            for k, ((W, b), (gW, gb)) in enumerate(zip(params, grads)):
                mW, mb = m[k]
                vW, vb = v[k]
                mW = cfg.beta1 * mW + (1 - cfg.beta1) * gW
                mb = cfg.beta1 * mb + (1 - cfg.beta1) * gb
                vW = cfg.beta2 * vW + (1 - cfg.beta2) * gW**2
                vb = cfg.beta2 * vb + (1 - cfg.beta2) * gb**2
                m[k] = (mW, mb)
                v[k] = (vW, vb)
                new_params.append((W - lr_t * mW / (np.sqrt(vW) + cfg.eps),
                                   b - lr_t * mb / (np.sqrt(vb) + cfg.eps)))
            params = new_params
        if batch == n:
            trace.append(loss)
    final, _ = _loss_and_grads(params, X, z, cfg.activation)
    trace.append(final)
    return MlpModel(X.shape[1], cfg, trace, params)


def _loss_and_grads(params, X, z, kind):
    logits, pre, post = _forward(params, X, kind)
    n = len(z)
    # stable BCE with logits
    loss = float(np.mean(np.maximum(logits, 0) - logits * z + np.log1p(np.exp(-np.abs(logits)))))
    p = 1.0 / (1.0 + np.exp(-np.clip(logits, -500, 500)))
    delta = ((p - z) / n)[:, None]
    grads = [None] * len(params)
    for layer in range(len(params) - 1, -1, -1):
        W, _ = params[layer]
        grads[layer] = (post[layer].T @ delta, delta.sum(axis=0))
        if layer > 0:
            delta = (delta @ W.T) * _act_grad(pre[layer - 1], post[layer], kind)
    return loss, grads
