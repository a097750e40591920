"""Command line: ``gradpso list | run | compare``."""
from __future__ import annotations

import argparse
import sys

from .core import ConfigError
from .harness import ExperimentConfig, apply_overrides, format_table, load_config, run_experiment, write_outputs
from .hybrids import STRATEGIES
from .objectives import OBJECTIVE_NAMES


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gradpso", description="PSO / gradient hybrid benchmark harness")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="print strategy identifiers and objective names")
    for name, text in (("run", "run an experiment and write traces.csv / summary.json"),
                       ("compare", "run an experiment and print a comparison table")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", required=True, metavar="PATH")
        s.add_argument("--out", default=None if name == "compare" else "results", metavar="DIR")
        s.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
        s.add_argument("--jobs", type=int, default=1, metavar="N")
    return p


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "list":
        for name in sorted(STRATEGIES + OBJECTIVE_NAMES):
            print(name)
        return 0

    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        data = apply_overrides(load_config(args.config), args.overrides)
        config = ExperimentConfig.from_dict(data)
    except ConfigError as exc:
        print(f"gradpso: error: {exc}", file=sys.stderr)
        return 2

    try:
        summaries, traces = run_experiment(config, jobs=args.jobs)
        if args.out is not None:
            write_outputs(summaries, traces, args.out)
    except Exception as exc:  # noqa: BLE001 - surfaced as exit status 1
        print(f"gradpso: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.command == "compare":
        print(f"{config.objective}  D={config.dim}  Np={config.Np}  "
              f"budget={config.budget.max_evals} evals  seeds={len(config.seeds)}")
        print(format_table(summaries))
    return 0


if __name__ == "__main__":
    sys.exit(main())
