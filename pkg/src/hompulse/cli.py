"""Command-line front end: ``hompulse run | validate | list-figures``."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .errors import ConfigError, ConvergenceError, HomError
from .scenario import FORMATS, default_jobs, figure_names, figure_text, load_config, run_scenario
from .validation import MATRICES, run_validation

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hompulse",
        description="Time-resolved Hong-Ou-Mandel coincidence datasets for filtered Gaussian pulses",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a scenario config over its grid")
    run.add_argument("config", help="path to a YAML scenario, or the name of a bundled figure config")
    run.add_argument("--out", help="output file (default: the config's output.path, else stdout)")
    run.add_argument("--format", choices=FORMATS, help="output format (default: the config's, else csv)")
    run.add_argument("--jobs", type=int, default=None, help="worker processes (default: available CPUs)")

    val = sub.add_parser("validate", help="run a built-in closed-form/oracle check matrix")
    val.add_argument("matrix", help=f"one of: {', '.join(MATRICES)}")
    val.add_argument("--tol", type=float, default=None, help="override every row's tolerance")

    figs = sub.add_parser("list-figures", help="print the bundled figure configs")
    figs.add_argument("--names", action="store_true", help="print names only")
    return parser


def _run(args) -> int:
    config = load_config(args.config)
    jobs = args.jobs if args.jobs is not None else default_jobs()
    if jobs < 1:
        raise ConfigError(f"--jobs must be >= 1, got {jobs}")
    dataset = run_scenario(config, jobs=jobs)
    fmt = args.format or (config.output.format if config.output else "csv")
    text = dataset.render(fmt)
    path = args.out or (config.output.path if config.output else None)
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _validate(args) -> int:
    report = run_validation(args.matrix, tol=args.tol)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _list_figures(args) -> int:
    for name in figure_names():
        if args.names:
            print(name)
        else:
            print(f"--- # {name}")
            sys.stdout.write(figure_text(name))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": _run, "validate": _validate, "list-figures": _list_figures}
    try:
        return handlers[args.command](args)
    except ConvergenceError as exc:
        print(f"hompulse: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (HomError, OSError) as exc:
        print(f"hompulse: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
