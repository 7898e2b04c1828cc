"""Batch experiment driver and line-delimited JSON run records.

Each run writes ``<out>/<problem>/<method>/repeat_<r>.jsonl``: a header line
with the run configuration, one line per evaluated point (including the
normalised hypervolume and IGD+ of the archive so far) and a footer with the
run status. Python's ``json`` prints floats with the shortest repr that
round-trips, so re-reading a file gives bit-identical values.
"""

from __future__ import annotations

import json
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..acquire import IterationRecord, RunConfig, RunError, RunTrace, run
from ..indicators import hv_indicator, igd_plus, load_reference_set, normalise_front
from ..problems import lhs_maximin, parse_key, reference_ideal_points

log = logging.getLogger(__name__)

MODELS = ("GBT", "MLP", "GP")
SCALARISERS = ("AT", "HYPI", "DOMRANK", "PHC")
DEFAULT_METHODS = tuple(f"{m}-{s}" for m in MODELS for s in SCALARISERS)
WALL_CLOCK_FIELDS = ("seconds",)


def parse_method(method: str) -> tuple[str, str]:
    """``"GBT-PHC"`` to ``("GBT", "PHC")``; ``"RANDOM"`` needs no scalariser."""
    parts = method.strip().upper().split("-")
    if parts == ["RANDOM"]:
        return "RANDOM", "PHC"
    if len(parts) != 2 or parts[0] not in MODELS:
        raise ValueError(f"method {method!r} should look like 'GBT-PHC' or 'RANDOM'")
    return parts[0], parts[1]


def resolve_rule(rule, d: int) -> int:
    """Budget rules: an integer, or a multiple of the dimension such as ``"2d"``."""
    text = str(rule).strip().lower()
    if text.endswith("d"):
        return int(text[:-1] or 1) * d
    return int(text)


@dataclass(frozen=True)
class ExperimentConfig:
    """A grid of problems, methods and repeats.

    ``evaluations`` counts evaluations after the initial design, so each run
    uses ``S + evaluations`` in total.
    """

    problems: tuple[str, ...]
    methods: tuple[str, ...] = DEFAULT_METHODS
    repeats: int = 21
    seed: int = 0
    initial: str = "2d"
    evaluations: int = 300
    acquisition_budget: str = "1024d"
    gamma: float = 1.0 / 3.0
    out: str = "results"
    reference_sets: str | None = None
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "problems", tuple(parse_key(p).key for p in self.problems))
        object.__setattr__(self, "methods", tuple(m.strip().upper() for m in self.methods))
        for m in self.methods:
            parse_method(m)
        if self.repeats < 1:
            raise ValueError("need at least one repeat")
        if len(set(self.repeat_seeds())) != self.repeats:
            raise ValueError("repeat seeds collide")

    def repeat_seeds(self) -> list[int]:
        return [int(np.random.SeedSequence([self.seed, r]).generate_state(1)[0])
                for r in range(self.repeats)]

    def run_config(self, problem: str, method: str, repeat: int) -> RunConfig:
        d = parse_key(problem).d
        model, scalariser = parse_method(method)
        S = resolve_rule(self.initial, d)
        return RunConfig(problem, scalariser, model, self.gamma, S, S + self.evaluations,
                         resolve_rule(self.acquisition_budget, d), self.repeat_seeds()[repeat])

    def design_seed(self, problem: str, repeat: int) -> int:
        key = zlib.crc32(problem.encode())
        return int(np.random.SeedSequence([self.seed, repeat, key]).generate_state(1)[0])

    def initial_design(self, problem: str, repeat: int) -> np.ndarray:
        """The Latin hypercube shared by every method on this (problem, repeat)."""
        d = parse_key(problem).d
        return lhs_maximin(resolve_rule(self.initial, d), d, seed=self.design_seed(problem, repeat))

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


@dataclass
class RunRecord:
    """Everything needed to re-analyse one run without re-running it."""

    problem: str
    method: str
    repeat: int
    config: dict
    status: str
    iterations: list[dict] = field(default_factory=list)
    error: str | None = None

    @property
    def hv(self) -> np.ndarray:
        return np.array([np.nan if r["hv"] is None else r["hv"] for r in self.iterations])

    @property
    def seconds(self) -> np.ndarray:
        return np.array([r["seconds"] for r in self.iterations])

    def final_hv(self) -> float:
        return float(self.hv[-1]) if self.iterations else np.nan

    def without_wall_clock(self) -> dict:
        its = [{k: v for k, v in r.items() if k not in WALL_CLOCK_FIELDS} for r in self.iterations]
        return {"problem": self.problem, "method": self.method, "repeat": self.repeat,
                "config": self.config, "status": self.status, "error": self.error,
                "iterations": its}


def record_path(out, problem: str, method: str, repeat: int) -> Path:
    return Path(out) / problem / method / f"repeat_{repeat:03d}.jsonl"


def _indicator_series(trace: RunTrace, problem: str, reference_sets) -> tuple[list, list]:
    """Hypervolume and IGD+ of every archive prefix, recomputed only when the front changes."""
    F = trace.F
    try:
        ideal, ref = reference_ideal_points(problem)
    except KeyError:
        log.warning("no reference point tabulated for %s; hypervolume not recorded", problem)
        return [None] * len(F), [None] * len(F)
    Z = None
    if reference_sets:
        path = Path(reference_sets) / f"{problem}.txt"
        if path.exists():
            Z = load_reference_set(path, n_obj=F.shape[1])
    hv, igd = [], []
    current_hv, current_igd = 0.0, None
    for i, f in enumerate(F):
        # a weakly dominated newcomer leaves both indicators unchanged
        if i == 0 or not np.any(np.all(F[:i] <= f, axis=1)):
            current_hv = hv_indicator(F[: i + 1], ideal, ref)
            if Z is not None:
                current_igd = igd_plus(normalise_front(F[: i + 1], ideal, ref), Z)
        hv.append(current_hv)
        igd.append(current_igd)
    return hv, igd


def _execute(exp: ExperimentConfig, problem: str, method: str, repeat: int) -> RunRecord:
    cfg = exp.run_config(problem, method, repeat)
    X0 = exp.initial_design(problem, repeat)
    status, error = "ok", None
    try:
        trace = run(cfg, initial=X0)
    except RunError as exc:
        log.error("%s %s repeat %d failed: %s", problem, method, repeat, exc)
        status, error = "error", str(exc)
        trace = exc.trace or RunTrace(cfg)
    except Exception as exc:  # configuration problems surface before any evaluation
        log.error("%s %s repeat %d failed: %s", problem, method, repeat, exc)
        status, error = "error", f"{type(exc).__name__}: {exc}"
        trace = RunTrace(cfg)
    hv, igd = _indicator_series(trace, problem, exp.reference_sets)
    iterations = []
    for rec, h, q in zip(trace.records, hv, igd):
        blob = rec.to_dict()
        blob["hv"] = h
        blob["igd_plus"] = q
        iterations.append(blob)
    record = RunRecord(problem, method, repeat, cfg.to_dict(), status, iterations, error)
    write_record(record, exp.out)
    return record


def write_record(record: RunRecord, out) -> Path:
    path = record_path(out, record.problem, record.method, record.repeat)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {"type": "header", "version": __version__, "problem": record.problem,
              "method": record.method, "repeat": record.repeat, "config": record.config}
    with path.open("w") as fh:
        fh.write(json.dumps(header) + "\n")
        for it in record.iterations:
            fh.write(json.dumps({"type": "iteration", **it}) + "\n")
        fh.write(json.dumps({"type": "footer", "status": record.status, "error": record.error}) + "\n")
    return path


def read_record(path) -> RunRecord:
    header, footer, iterations = None, None, []
    with Path(path).open() as fh:
        for line in fh:
            blob = json.loads(line)
            kind = blob.pop("type")
            if kind == "header":
                header = blob
            elif kind == "iteration":
                iterations.append(blob)
            elif kind == "footer":
                footer = blob
    if header is None:
        raise ValueError(f"{path} has no header line")
    # a missing footer means the writer was interrupted
    footer = footer or {"status": "incomplete", "error": None}
    return RunRecord(header["problem"], header["method"], header["repeat"], header["config"],
                     footer["status"], iterations, footer["error"])


def load_records(out) -> list[RunRecord]:
    paths = sorted(Path(out).glob("*/*/repeat_*.jsonl"))
    return [read_record(p) for p in paths]


def run_experiment(config: ExperimentConfig, jobs: int | None = None) -> list[RunRecord]:
    """Run every (problem, method, repeat) combination and write its record.

    Runs are independent; with ``jobs > 1`` they execute in worker processes.
    A failing run is recorded with status ``"error"`` and does not stop the
    others.

    Returns:
        Records sorted by problem, method and repeat.
    """
    jobs = config.jobs if jobs is None else jobs
    tasks = [(p, m, r) for p in config.problems for m in config.methods for r in range(config.repeats)]
    if jobs <= 1:
        records = [_execute(config, *t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_execute, [config] * len(tasks), *zip(*tasks)))
    return sorted(records, key=lambda r: (r.problem, r.method, r.repeat))


def to_trace(record: RunRecord) -> RunTrace:
    """Rebuild the run trace held in a record."""
    trace = RunTrace(RunConfig(**record.config))
    trace.records = [IterationRecord.from_dict(b) for b in record.iterations]
    return trace
