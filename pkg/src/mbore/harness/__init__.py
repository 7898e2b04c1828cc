"""Experiment driver, persistence, statistics and command-line interface."""

from .experiment import (
    ExperimentConfig,
    RunRecord,
    load_records,
    parse_method,
    read_record,
    run_experiment,
    to_trace,
    write_record,
)
from .stats import holm_bonferroni, wilcoxon_signed_rank_one_sided
from .summary import convergence, summarise, timing

__all__ = [
    "ExperimentConfig",
    "RunRecord",
    "convergence",
    "holm_bonferroni",
    "load_records",
    "parse_method",
    "read_record",
    "run_experiment",
    "summarise",
    "timing",
    "to_trace",
    "wilcoxon_signed_rank_one_sided",
    "write_record",
]
