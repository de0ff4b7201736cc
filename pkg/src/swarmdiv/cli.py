"""Command line front end.

Subcommands: ``run`` (one algorithm, one run, trace to stdout or a file),
``campaign`` (full experiment into an archive directory), ``analyze``
(reports over an archive), and ``functions`` (objective registry listing).

Exit codes: 0 success, 1 configuration error, 2 runtime failure,
3 analysis error.
"""

from __future__ import annotations

import argparse
import sys

from .analyze import MODES, AnalysisError, analyze
from .config import ConfigError, load_config
from .objectives import REGISTRY, ObjectiveError
from .runner import run_campaign, run_from_config, write_trace, write_trace_file
from .swarm import EvaluationError

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    # Usage mistakes are configuration errors per the documented exit codes.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="swarmdiv", description=__doc__.split("\n\n")[1])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a single run and emit its trace")
    run.add_argument("--config", required=True, help="experiment config file")
    run.add_argument("--algorithm", required=True, help="algorithm tag from the config")
    run.add_argument("--run-index", type=int, default=0, help="run index within the campaign")
    run.add_argument("--seed", type=int, default=None, help="override the master seed")
    run.add_argument("--trace", default="-", help="trace destination ('-' for stdout)")

    camp = sub.add_parser("campaign", help="run every (algorithm, run) cell of a config")
    camp.add_argument("--config", required=True, help="experiment config file")
    camp.add_argument("--seed", type=int, default=None, help="override the master seed")
    camp.add_argument("--out", default=None, help="archive directory (overrides output.dir)")
    camp.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    ana = sub.add_parser("analyze", help="write reports and figures for an archive")
    ana.add_argument("archive", help="campaign archive directory")
    ana.add_argument("--mode", required=True, choices=MODES)
    ana.add_argument("--out", default=None, help="report directory (default: <archive>/analysis)")
    ana.add_argument("--significance", type=float, default=0.05,
                     help="Welch test significance for compare mode")
    ana.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    sub.add_parser("functions", help="list the objective registry")
    return parser


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
        result = run_from_config(config, args.algorithm, args.run_index)
    except (ConfigError, ObjectiveError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except EvaluationError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 2
    if args.trace == "-":
        write_trace(sys.stdout, result.records)
        print(f"final best: {result.final_best:.6e}", file=sys.stderr)
    else:
        write_trace_file(args.trace, result.records)
        print(f"{args.algorithm} run {args.run_index}: final best {result.final_best:.6e}, "
              f"trace written to {args.trace}")
    return 0


def _cmd_campaign(args) -> int:
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
        result = run_campaign(config, out_dir=args.out, jobs=args.jobs)
    except (ConfigError, ObjectiveError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"campaign failed: {exc}", file=sys.stderr)
        return 2
    ok = sum(1 for o in result.outcomes if o.status == "ok")
    failed = len(result.outcomes) - ok
    print(f"campaign complete: {ok} runs ok, {failed} failed, archive at {result.out_dir}")
    return 0 if failed == 0 else 2


def _cmd_analyze(args) -> int:
    try:
        written = analyze(args.archive, args.mode, out_dir=args.out,
                          figures=not args.no_figures, significance=args.significance)
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(path)
    return 0


def _cmd_functions(_args) -> int:
    width = max(len(name) for name in REGISTRY)
    for name in sorted(REGISTRY):
        entry = REGISTRY[name]
        print(f"{name:<{width}}  [{entry.lower:g}, {entry.upper:g}]^N  {entry.note}")
    return 0


_HANDLERS = {
    "run": _cmd_run,
    "campaign": _cmd_campaign,
    "analyze": _cmd_analyze,
    "functions": _cmd_functions,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return _HANDLERS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
