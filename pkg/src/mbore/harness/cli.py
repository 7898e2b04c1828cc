"""Command-line entry point: ``mbore run | summarise | convergence | list-problems``.

Experiment settings come from an INI file with an ``[experiment]`` section;
any key can be overridden by a flag of the same name. The default output
directory is taken from ``$MBORE_OUT`` when set.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import os
import sys
from pathlib import Path

from ..problems import list_problems
from .experiment import DEFAULT_METHODS, ExperimentConfig, load_records, run_experiment
from .summary import convergence, summarise, timing, write_convergence_csv

OUT_ENV = "MBORE_OUT"
SECTION = "experiment"

# key -> (type, help)
_KEYS = {
    "problems": (str, "comma-separated problem keys, e.g. DTLZ2_5_2,WFG4_10_3"),
    "methods": (str, "comma-separated methods such as GBT-PHC, GP-AT or RANDOM"),
    "repeats": (int, "repeats per problem and method"),
    "seed": (int, "base seed; repeat seeds and designs derive from it"),
    "initial": (str, "initial design size, an integer or a rule like 2d"),
    "evaluations": (int, "evaluations after the initial design"),
    "acquisition_budget": (str, "acquisition budget B, an integer or a rule like 1024d"),
    "gamma": (float, "class-1 fraction for classifier methods"),
    "out": (str, "output directory for run records"),
    "reference_sets": (str, "directory of <problem>.txt reference sets for IGD+"),
    "jobs": (int, "independent runs executed in parallel"),
}


def default_out() -> str:
    return os.environ.get(OUT_ENV, "results")


def _split(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.replace("\n", ",").split(",") if p.strip())


def load_experiment(path: str | None, overrides: dict) -> ExperimentConfig:
    """Merge an INI file and command-line overrides into an experiment config."""
    values: dict = {}
    if path:
        parser = configparser.ConfigParser()
        if not parser.read(path):
            raise FileNotFoundError(path)
        if parser.has_section(SECTION):
            for key, raw in parser.items(SECTION):
                if key not in _KEYS:
                    raise ValueError(f"unknown key {key!r} in {path}")
                values[key] = _KEYS[key][0](raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    if "problems" not in values:
        raise ValueError("no problems given; set 'problems' in the config file or pass --problems")
    values["problems"] = _split(values["problems"])
    values["methods"] = _split(values["methods"]) if "methods" in values else DEFAULT_METHODS
    values.setdefault("out", default_out())
    return ExperimentConfig(**values)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help=f"records directory (default ${OUT_ENV} or ./results)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mbore", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an experiment")
    run.add_argument("--config", help="INI file with an [experiment] section")
    for key, (typ, text) in _KEYS.items():
        flags = [f"--{key}"] + ([f"--{key.replace('_', '-')}"] if "_" in key else [])
        run.add_argument(*flags, dest=key, type=typ, default=None, help=text)
    run.add_argument("-v", "--verbose", action="store_true")

    summ = sub.add_parser("summarise", aliases=["summarize"], help="best-method counts from records")
    _add_common(summ)
    summ.add_argument("--alpha", type=float, default=0.05)
    summ.add_argument("--output", help="CSV path (default <out>/summary.csv)")

    conv = sub.add_parser("convergence", help="median/IQR hypervolume and timing series")
    _add_common(conv)
    conv.add_argument("--output", help="CSV path (default <out>/convergence.csv)")

    lp = sub.add_parser("list-problems", help="print the benchmark problem keys")
    lp.add_argument("--high-dimensional", action="store_true", help="include d = 20, 50, 100 WFG")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "list-problems":
        print("\n".join(list_problems(args.high_dimensional)))
        return 0

    if args.command == "run":
        overrides = {k: getattr(args, k) for k in _KEYS}
        try:
            exp = load_experiment(args.config, overrides)
        except (ValueError, FileNotFoundError) as exc:
            print(f"mbore run: {exc}", file=sys.stderr)
            return 2
        records = run_experiment(exp)
        failed = [r for r in records if r.status != "ok"]
        print(f"{len(records)} runs written to {exp.out} ({len(failed)} failed)")
        return 1 if failed else 0

    out = Path(args.out or default_out())
    records = load_records(out)
    if not records:
        print(f"no records found under {out}", file=sys.stderr)
        return 2

    if args.command in ("summarise", "summarize"):
        summary = summarise(records, alpha=args.alpha)
        path = Path(args.output) if args.output else out / "summary.csv"
        summary.write_csv(path)
        for row in summary.rows:
            tied = [m for m, eq in row.equivalent.items() if eq]
            print(f"{row.problem}: best {row.best}; best or equivalent: {', '.join(tied)}")
        counts = summary.best_counts()
        print("totals: " + ", ".join(f"{m}={c}" for m, c in counts.items()))
        print(f"wrote {path}")
        return 0

    path = Path(args.output) if args.output else out / "convergence.csv"
    write_convergence_csv(convergence(records), path)
    tpath = path.with_name("timing.csv")
    with open(tpath, "w") as fh:
        fh.write("problem,method,iteration,median_seconds\n")
        for problem, method, i, sec in timing(records):
            fh.write(f"{problem},{method},{i},{sec!r}\n")
    print(f"wrote {path} and {tpath}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
