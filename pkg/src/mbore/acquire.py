"""Optimisation loops: classifier-based density-ratio BO and GP/EI BO.

Both loops share one skeleton. An initial maximin LHS design is evaluated,
then every iteration scalarises the archive, fits a surrogate, maximises its
acquisition function over the unit cube and evaluates the chosen point. The
classifier loop labels the best ``ceil(gamma * t)`` scalarised values as
class 1 and maximises the class-1 probability; the GP loop fits the
scalarised values directly and maximises expected improvement over the best
one.

Randomness is drawn from generators seeded by ``(seed, stream, iteration)``
so runs are reproducible bit for bit and independent of wall-clock timing.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm

from . import classify
from .cmaes import cma_minimise
from .gp import GpModel, ei_value, gp_fit
from .problems import ProblemSpec, evaluate, lhs_maximin, parse_key
from .scalarise import Scalariser, generate_weights, scalarise

MODEL_KINDS = ("GBT", "MLP", "GP", "RANDOM")
DUPLICATE_TOL = 1e-8
DUPLICATE_BOX = 1e-3
# guards ceil() against products such as (1/3) * 3k landing a hair above k
_CEIL_SLACK = 1e-9

# seed streams
_INIT, _SCALARISE, _MODEL, _ACQUIRE, _GUARD, _RANDOM = range(6)


class RunError(RuntimeError):
    """A failure inside an optimisation run, tagged with the iteration index."""

    def __init__(self, iteration: int, cause: BaseException, trace: "RunTrace | None" = None):
        super().__init__(f"iteration {iteration}: {type(cause).__name__}: {cause}")
        self.iteration = iteration
        self.cause = cause
        # records completed before the failure
        self.trace = trace


@dataclass(frozen=True)
class RunConfig:
    """Settings for one optimisation run.

    ``S``, ``T`` and ``B`` default to ``2d``, ``S + 300`` and ``1024d``.
    """

    problem: str
    scalariser: str = "PHC"
    model: str = "GBT"
    gamma: float = 1.0 / 3.0
    S: int | None = None
    T: int | None = None
    B: int | None = None
    seed: int = 0
    n_restarts: int = 10
    n_local: int = 10

    def __post_init__(self):
        spec = self.spec
        object.__setattr__(self, "problem", spec.key)
        object.__setattr__(self, "scalariser", Scalariser.parse(self.scalariser).value)
        model = str(self.model).upper()
        if model == "XGB":
            model = "GBT"
        if model not in MODEL_KINDS:
            raise ValueError(f"model must be one of {MODEL_KINDS}, got {self.model!r}")
        object.__setattr__(self, "model", model)
        d = spec.d
        S = 2 * d if self.S is None else int(self.S)
        T = S + 300 if self.T is None else int(self.T)
        B = 1024 * d if self.B is None else int(self.B)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "B", B)
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if S < 2:
            raise ValueError("need at least two initial samples")
        if T < S:
            raise ValueError("total budget T must be at least S")
        if B < 1:
            raise ValueError("acquisition budget B must be positive")

    @property
    def spec(self) -> ProblemSpec:
        return parse_key(self.problem) if isinstance(self.problem, str) else self.problem

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class IterationRecord:
    """One evaluated point.

    ``g`` is the scalarised archive the surrogate was trained on (None for
    initial-design and random-search points); ``seconds`` covers the whole
    iteration body, evaluation included.
    """

    iteration: int
    phase: str
    x: np.ndarray
    f: np.ndarray
    g: np.ndarray | None
    seconds: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "phase": self.phase,
            "x": self.x.tolist(),
            "f": self.f.tolist(),
            "g": None if self.g is None else self.g.tolist(),
            "seconds": self.seconds,
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, blob: dict) -> "IterationRecord":
        g = blob.get("g")
        return cls(int(blob["iteration"]), blob["phase"], np.asarray(blob["x"], float),
                   np.asarray(blob["f"], float), None if g is None else np.asarray(g, float),
                   float(blob["seconds"]), dict(blob.get("diagnostics", {})))


@dataclass
class RunTrace:
    config: RunConfig
    records: list[IterationRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def X(self) -> np.ndarray:
        return np.array([r.x for r in self.records])

    @property
    def F(self) -> np.ndarray:
        return np.array([r.f for r in self.records])

    @property
    def seconds(self) -> np.ndarray:
        return np.array([r.seconds for r in self.records])


# ---------------------------------------------------------------- labelling


def assign_labels(g, gamma: float, ensure_both: bool = False) -> tuple[float, np.ndarray]:
    """Split the archive into its best ``ceil(gamma * t)`` members and the rest.

    Ranks ``g`` ascending with ties broken by archive index. The threshold
    ``tau`` is the midpoint between the last class-1 value and the first
    class-0 value, or ``max(g) + 1`` when every point is class 1.

    Args:
        g: scalarised values, smaller is better.
        gamma: target class-1 fraction in ``(0, 1]``.
        ensure_both: cap the class-1 count at ``t - 1`` so that both classes
            are present, as classifier training requires.

    Returns:
        ``(tau, z)`` with ``z[i] = 1`` for the selected members.
    """
    g = np.asarray(getattr(g, "g", g), dtype=float).ravel()
    t = len(g)
    if t < 2:
        raise ValueError("labelling needs at least two observations")
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    n1 = max(1, math.ceil(gamma * t - _CEIL_SLACK))
    if ensure_both:
        n1 = min(n1, t - 1)
    order = np.argsort(g, kind="stable")
    z = np.zeros(t, dtype=int)
    z[order[:n1]] = 1
    if n1 == t:
        tau = float(g.max() + 1.0)
    else:
        tau = 0.5 * (g[order[n1 - 1]] + g[order[n1]])
    return float(tau), z


# ---------------------------------------------------------------- acquisition


def maximise_classifier(model, d: int, B: int, n_restarts: int = 10, seed=None) -> np.ndarray:
    """Maximise the class-1 probability with restart CMA-ES in the unit cube.

    The search ranks points by the model's logit when it exposes one, which
    orders points exactly as the probability does but is not flattened by
    the probability clamp. At most ``B`` points are scored.
    """
    score = getattr(model, "decision_function", None) or model.predict_proba
    res = cma_minimise(lambda X: -np.asarray(score(X), dtype=float), d, B,
                       n_restarts=n_restarts, seed=seed)
    return res.x


def maximise_ei(gp: GpModel, tau: float, d: int, B: int, n_local: int = 10, seed=None) -> np.ndarray:
    """Maximise expected improvement below ``tau``.

    EI is evaluated at ``B`` uniform random points; the ``n_local`` best are
    refined with bounded L-BFGS-B on log EI, using the analytic posterior
    gradient when the model provides one. Returns the best point overall.
    """
    rng = np.random.default_rng(seed)
    X = rng.random((B, d))
    ei = ei_value(*gp.posterior(X), tau)
    best = np.argsort(-ei, kind="stable")[: max(0, n_local)]
    best_x, best_ei = X[best[0]].copy(), float(ei[best[0]])

    grad_fn = getattr(gp, "posterior_with_grad", None)

    def neg_log_ei(x):
        mean, var, dmean, dvar = grad_fn(x)
        sd = np.sqrt(var)
        z = (tau - mean) / sd
        val = sd * (z * norm.cdf(z) + norm.pdf(z))
        if not val > 1e-300:
            return 690.8, np.zeros(d)
        # dEI = -Phi(z) dmean + phi(z) dsd
        grad = -norm.cdf(z) * dmean + norm.pdf(z) * dvar / (2.0 * sd)
        return -np.log(val), -grad / val

    def neg_log_ei_numeric(x):
        val = ei_value(*gp.posterior(x[None, :]), tau)
        return -np.log(max(float(val[0]), 1e-300))

    for i in best:
        if ei[i] <= 0.0:
            continue
        if grad_fn is not None:
            res = minimize(neg_log_ei, X[i], jac=True, method="L-BFGS-B", bounds=[(0.0, 1.0)] * d,
                           options={"maxiter": 100})
        else:
            res = minimize(neg_log_ei_numeric, X[i], method="L-BFGS-B", bounds=[(0.0, 1.0)] * d,
                           options={"maxiter": 100})
        x = np.clip(res.x, 0.0, 1.0)
        val = float(ei_value(*gp.posterior(x[None, :]), tau)[0])
        if val > best_ei:
            best_x, best_ei = x, val
    return best_x


def _dedupe(x, X, rng) -> tuple[np.ndarray, bool]:
    """Nudge ``x`` within a small box if it coincides with an archive point."""
    if len(X) and np.min(np.max(np.abs(X - x), axis=1)) <= DUPLICATE_TOL:
        x = np.clip(x + rng.uniform(-DUPLICATE_BOX, DUPLICATE_BOX, len(x)), 0.0, 1.0)
        return x, True
    return x, False


# ---------------------------------------------------------------- loops


def _stream_seed(seed: int, stream: int, iteration: int = 0) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), stream, iteration])


def _rng(seed, stream, iteration=0) -> np.random.Generator:
    return np.random.default_rng(_stream_seed(seed, stream, iteration))


def _int_seed(seed, stream, iteration=0) -> int:
    return int(_stream_seed(seed, stream, iteration).generate_state(1)[0])


def initial_design(config: RunConfig) -> np.ndarray:
    return lhs_maximin(config.S, config.spec.d, seed=_int_seed(config.seed, _INIT))


def _initialise(config: RunConfig, initial) -> RunTrace:
    spec = config.spec
    X0 = initial_design(config) if initial is None else np.asarray(initial, dtype=float)
    if X0.shape != (config.S, spec.d):
        raise ValueError(f"initial design must have shape {(config.S, spec.d)}, got {X0.shape}")
    trace = RunTrace(config)
    for i, x in enumerate(X0):
        start = time.perf_counter()
        try:
            f = evaluate(spec, x)
        except Exception as exc:
            raise RunError(i, exc, trace) from exc
        trace.records.append(IterationRecord(i, "init", x.copy(), f, None, time.perf_counter() - start))
    return trace


def _loop(config: RunConfig, initial, propose) -> RunTrace:
    trace = _initialise(config, initial)
    spec = config.spec
    weights = generate_weights(spec.n_obj) if config.scalariser == "AT" else None
    for it in range(config.S, config.T):
        start = time.perf_counter()
        try:
            X, F = trace.X, trace.F
            diag: dict = {}
            x, g = propose(it, X, F, weights, diag)
            x, nudged = _dedupe(x, X, _rng(config.seed, _GUARD, it))
            if nudged:
                diag["perturbed_duplicate"] = True
            f = evaluate(spec, x)
        except Exception as exc:
            raise RunError(it, exc, trace) from exc
        trace.records.append(IterationRecord(it, "search", x, f, g, time.perf_counter() - start, diag))
    return trace


def mbore_run(config: RunConfig, initial=None) -> RunTrace:
    """Run classifier-based density-ratio BO (model ``GBT`` or ``MLP``).

    Args:
        config: run settings.
        initial: optional ``(S, d)`` initial design, e.g. shared across methods.

    Returns:
        A trace of ``T`` records.

    Raises:
        RunError: wrapping any failure, with its iteration index.
    """
    if config.model not in ("GBT", "MLP"):
        raise ValueError(f"mbore_run needs a classifier model, got {config.model}")
    d = config.spec.d

    def propose(it, X, F, weights, diag):
        sc = scalarise(F, config.scalariser, rng=_rng(config.seed, _SCALARISE, it), weights=weights)
        tau, z = assign_labels(sc.g, config.gamma, ensure_both=True)
        model = classify.fit(config.model, X, z, seed=_int_seed(config.seed, _MODEL, it))
        x = maximise_classifier(model, d, config.B, config.n_restarts,
                                seed=_int_seed(config.seed, _ACQUIRE, it))
        diag.update(tau=tau, n_class1=int(z.sum()),
                    train_loss=float(model.train_loss_trace[-1]),
                    acquisition=float(model.predict_proba(x)[0]))
        if sc.weight is not None:
            diag["weight"] = sc.weight.tolist()
        return x, sc.g

    return _loop(config, initial, propose)


def bo_run(config: RunConfig, initial=None) -> RunTrace:
    """Run GP/EI BO on the scalarised archive with ``tau = min g``."""
    if config.model != "GP":
        raise ValueError(f"bo_run needs model GP, got {config.model}")
    d = config.spec.d

    def propose(it, X, F, weights, diag):
        sc = scalarise(F, config.scalariser, rng=_rng(config.seed, _SCALARISE, it), weights=weights)
        gp = gp_fit(X, sc.g, n_restarts=10, seed=_int_seed(config.seed, _MODEL, it))
        tau = float(sc.g.min())
        x = maximise_ei(gp, tau, d, config.B, config.n_local, seed=_int_seed(config.seed, _ACQUIRE, it))
        diag.update(tau=tau, log_marginal_likelihood=gp.log_marginal_likelihood, jitter=gp.jitter,
                    lengthscales=gp.theta.lengthscales.tolist(), output_scale=gp.theta.output_scale,
                    acquisition=float(ei_value(*gp.posterior(x[None, :]), tau)[0]))
        if sc.weight is not None:
            diag["weight"] = sc.weight.tolist()
        return x, sc.g

    return _loop(config, initial, propose)


def random_run(config: RunConfig, initial=None) -> RunTrace:
    """Uniform random search after the same initial design."""
    d = config.spec.d

    def propose(it, X, F, weights, diag):
        return _rng(config.seed, _RANDOM, it).random(d), None

    return _loop(config, initial, propose)


def run(config: RunConfig, initial=None) -> RunTrace:
    """Dispatch on ``config.model``."""
    if config.model == "GP":
        return bo_run(config, initial)
    if config.model == "RANDOM":
        return random_run(config, initial)
    return mbore_run(config, initial)
