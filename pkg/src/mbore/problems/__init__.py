"""Synthetic benchmark problems, reference points and initial designs.

Problems are addressed by string keys of the form ``"<SUITE><id>_<d>_<M>"``,
for example ``"DTLZ2_5_2"`` or ``"WFG4_10_3"``. Every problem takes inputs in
the unit hypercube and returns objectives to minimise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .dtlz import DTLZ
from .lhs import lhs_maximin
from .wfg import WFG

__all__ = [
    "ProblemSpec",
    "default_wfg_kl",
    "evaluate",
    "lhs_maximin",
    "list_problems",
    "parse_key",
    "reference_ideal_points",
]

DTLZ_CONFIGS = [(2, 2), (5, 2), (5, 3), (5, 5), (10, 2), (10, 3), (10, 5), (10, 10)]
WFG_CONFIGS = [(6, 2), (6, 3), (8, 2), (8, 3), (10, 2), (10, 3), (10, 5)]
WFG_HD_CONFIGS = [(20, 10), (50, 10), (100, 10)]

_KEY = re.compile(r"^(DTLZ|WFG)(\d+)_(\d+)_(\d+)$", re.IGNORECASE)


def default_wfg_kl(d: int, n_obj: int) -> tuple[int, int]:
    """Position/distance split: ``(4, d - 4)`` for two objectives, else ``(2M - 1, d - 2M + 1)``."""
    k = 4 if n_obj == 2 else 2 * n_obj - 1
    l = d - k
    if l < 1:
        raise ValueError(f"WFG with d={d}, M={n_obj} leaves no distance variables (k={k})")
    return k, l


@dataclass(frozen=True)
class ProblemSpec:
    suite: str
    id: int
    d: int
    n_obj: int
    k: int | None = None
    l: int | None = None

    def __post_init__(self):
        suite = self.suite.upper()
        object.__setattr__(self, "suite", suite)
        if self.n_obj < 2:
            raise ValueError("benchmarks need at least two objectives")
        if suite == "DTLZ":
            if self.id not in DTLZ:
                raise ValueError(f"DTLZ id must be 1-7, got {self.id}")
            if self.n_obj > self.d:
                raise ValueError("DTLZ needs M <= d")
        elif suite == "WFG":
            if self.id not in WFG:
                raise ValueError(f"WFG id must be 1-9, got {self.id}")
            if self.k is None and self.l is None:
                k, l = default_wfg_kl(self.d, self.n_obj)
            elif self.k is not None:
                k, l = self.k, self.d - self.k
            else:
                k, l = self.d - self.l, self.l
            if k + l != self.d or l < 1:
                raise ValueError(f"invalid WFG split k={k}, l={l} for d={self.d}")
            if k < self.n_obj - 1:
                raise ValueError(f"WFG needs k >= M - 1, got k={k}")
            if self.id in (2, 3) and l < 2:
                raise ValueError("WFG2/WFG3 need at least two distance variables")
            object.__setattr__(self, "k", k)
            object.__setattr__(self, "l", l)
        else:
            raise ValueError(f"unknown suite {self.suite!r}")

    @property
    def key(self) -> str:
        return f"{self.suite}{self.id}_{self.d}_{self.n_obj}"

    @property
    def name(self) -> str:
        return self.key

    def __call__(self, X) -> np.ndarray:
        return evaluate(self, X)


def parse_key(key: str) -> ProblemSpec:
    m = _KEY.match(key.strip())
    if not m:
        raise ValueError(f"problem key {key!r} does not look like e.g. 'WFG4_10_3'")
    suite, pid, d, n_obj = m.groups()
    return ProblemSpec(suite.upper(), int(pid), int(d), int(n_obj))


def evaluate(spec: ProblemSpec | str, X) -> np.ndarray:
    """Objectives for unit-cube input(s); one row per point, or a vector for one point."""
    if isinstance(spec, str):
        spec = parse_key(spec)
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != spec.d:
        raise ValueError(f"{spec.key} expects {spec.d} variables, got {X.shape[1]}")
    if np.any(X < 0) or np.any(X > 1):
        raise ValueError("inputs must lie in the unit hypercube")
    if spec.suite == "DTLZ":
        F = DTLZ[spec.id](X, spec.n_obj)
    else:
        F = WFG[spec.id](X, spec.n_obj, spec.k)
    return F[0] if single else F


def list_problems(high_dimensional: bool = False) -> list[str]:
    keys = [f"DTLZ{i}_{d}_{m}" for i in DTLZ for d, m in DTLZ_CONFIGS]
    configs = WFG_CONFIGS + (WFG_HD_CONFIGS if high_dimensional else [])
    for i in WFG:
        for d, m in configs:
            # WFG2/3 pair distance variables, so a single one is not a valid problem
            if i in (2, 3) and default_wfg_kl(d, m)[1] < 2:
                continue
            keys.append(f"WFG{i}_{d}_{m}")
    return keys


# reference points by (problem id, d); ideal is zero except DTLZ7
_DTLZ_REF = {
    1: {2: 120.0, 5: 450.0, 10: 1000.0},
    2: {2: 2.0, 5: 2.0, 10: 4.0},
    3: {2: 250.0, 5: 1000.0, 10: 2000.0},
    4: {2: 2.0, 5: 2.0, 10: 4.0},
    5: {2: 2.0, 5: 2.0, 10: 4.0},
    6: {2: 2.5, 5: 5.0, 10: 10.0},
}
_DTLZ7_LAST_REF = {2: 23.0, 5: 60.0, 10: 110.0}
_DTLZ7_LAST_IDEAL = {2: 2.307, 3: 2.614, 5: 3.228, 10: 4.763}
_WFG_D = {6, 8, 10, 20, 50, 100}
_WFG_M = {2, 3, 5, 10}


def reference_ideal_points(spec: ProblemSpec | str) -> tuple[np.ndarray, np.ndarray]:
    """Tabulated ``(ideal, reference)`` vectors used to normalise indicators.

    Raises:
        KeyError: for a configuration outside the tables.
    """
    if isinstance(spec, str):
        spec = parse_key(spec)
    M, d = spec.n_obj, spec.d
    if spec.suite == "DTLZ":
        if spec.id == 7:
            if d not in _DTLZ7_LAST_REF or M not in _DTLZ7_LAST_IDEAL:
                raise KeyError(f"no tabulated points for {spec.key}")
            ref = np.r_[np.full(M - 1, 1.5), _DTLZ7_LAST_REF[d]]
            ideal = np.r_[np.zeros(M - 1), _DTLZ7_LAST_IDEAL[M]]
            return ideal, ref
        table = _DTLZ_REF[spec.id]
        if d not in table:
            raise KeyError(f"no tabulated points for {spec.key}")
        return np.zeros(M), np.full(M, table[d])
    if d not in _WFG_D or M not in _WFG_M:
        raise KeyError(f"no tabulated points for {spec.key}")
    return np.zeros(M), 2.0 * np.arange(1, M + 1) + 1.0
