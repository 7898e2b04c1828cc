"""Best-method counts and convergence series from stored run records."""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .experiment import RunRecord
from .stats import holm_bonferroni, wilcoxon_signed_rank_one_sided

log = logging.getLogger(__name__)

MIN_REPEATS = 5


@dataclass
class ProblemSummary:
    problem: str
    best: str
    medians: dict[str, float]
    pvalues: dict[str, float]
    equivalent: dict[str, bool]


@dataclass
class Summary:
    methods: list[str]
    rows: list[ProblemSummary]

    def best_counts(self) -> dict[str, int]:
        return {m: sum(row.equivalent.get(m, False) for row in self.rows) for m in self.methods}

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["problem", "best"] + [f"{m}_median" for m in self.methods]
                       + [f"{m}_best_or_equivalent" for m in self.methods])
            for row in self.rows:
                w.writerow([row.problem, row.best]
                           + [repr(row.medians.get(m, np.nan)) for m in self.methods]
                           + [int(row.equivalent.get(m, False)) for m in self.methods])
            w.writerow(["total", ""] + [""] * len(self.methods)
                       + [self.best_counts()[m] for m in self.methods])


def _final_hv_by_repeat(records: list[RunRecord]) -> dict[str, dict[str, dict[int, float]]]:
    table: dict = defaultdict(lambda: defaultdict(dict))
    for rec in records:
        if rec.status != "ok" or not rec.iterations:
            continue
        value = rec.final_hv()
        if np.isfinite(value):
            table[rec.problem][rec.method][rec.repeat] = value
    return table


def summarise(records: list[RunRecord], alpha: float = 0.05) -> Summary:
    """Per problem, the method with the largest median final hypervolume and its equals.

    Every other method is compared with the best by a one-sided paired
    Wilcoxon test on the repeats both completed (alternative: the best is
    larger), with Holm's correction across the comparisons. A method counts
    as best-or-equivalent unless its comparison is rejected.

    Problems with fewer than two methods or fewer than ``MIN_REPEATS`` shared
    repeats are skipped with a warning.
    """
    table = _final_hv_by_repeat(records)
    methods = sorted({rec.method for rec in records})
    rows = []
    for problem in sorted(table):
        by_method = table[problem]
        present = [m for m in methods if m in by_method]
        repeats = sorted(set.intersection(*(set(by_method[m]) for m in present))) if present else []
        if len(present) < 2 or len(repeats) < MIN_REPEATS:
            log.warning("skipping %s: %d methods, %d shared repeats", problem, len(present), len(repeats))
            continue
        values = {m: np.array([by_method[m][r] for r in repeats]) for m in present}
        medians = {m: float(np.median(v)) for m, v in values.items()}
        best = max(present, key=lambda m: (medians[m], -present.index(m)))
        others = [m for m in present if m != best]
        pvalues = {m: wilcoxon_signed_rank_one_sided(values[best], values[m]) for m in others}
        reject = holm_bonferroni([pvalues[m] for m in others], alpha)
        equivalent = {best: True}
        equivalent.update({m: not r for m, r in zip(others, reject)})
        rows.append(ProblemSummary(problem, best, medians, pvalues, equivalent))
    return Summary(methods, rows)


@dataclass
class ConvergencePoint:
    problem: str
    method: str
    iteration: int
    median: float
    q25: float
    q75: float
    n: int


def convergence(records: list[RunRecord]) -> list[ConvergencePoint]:
    """Median and inter-quartile range of the hypervolume at every iteration."""
    series: dict = defaultdict(list)
    for rec in records:
        if rec.status == "ok" and rec.iterations:
            series[(rec.problem, rec.method)].append(rec.hv)
    out = []
    for (problem, method), runs in sorted(series.items()):
        length = min(len(h) for h in runs)
        H = np.array([h[:length] for h in runs])
        q25, med, q75 = np.nanpercentile(H, [25, 50, 75], axis=0)
        for i in range(length):
            out.append(ConvergencePoint(problem, method, i, float(med[i]), float(q25[i]),
                                        float(q75[i]), len(runs)))
    return out


def timing(records: list[RunRecord]) -> list[tuple[str, str, int, float]]:
    """Median wall-clock seconds per iteration for each (problem, method)."""
    series: dict = defaultdict(list)
    for rec in records:
        if rec.status == "ok" and rec.iterations:
            series[(rec.problem, rec.method)].append(rec.seconds)
    out = []
    for (problem, method), runs in sorted(series.items()):
        length = min(len(s) for s in runs)
        med = np.median(np.array([s[:length] for s in runs]), axis=0)
        out.extend((problem, method, i, float(med[i])) for i in range(length))
    return out


def write_convergence_csv(points: list[ConvergencePoint], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["problem", "method", "iteration", "median_hv", "q25_hv", "q75_hv", "n_runs"])
        for p in points:
            w.writerow([p.problem, p.method, p.iteration, repr(p.median), repr(p.q25), repr(p.q75), p.n])
