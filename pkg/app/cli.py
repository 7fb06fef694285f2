"""Command-line entry point: ``soqe-kit <command> <problem-file> [args] [flags]``."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from app.commands.dispatcher import Dispatcher
from app.config import load_cli_settings
from app.logic.errors import SoqeError, UsageError
from app.logic.locality import PRESETS as THEORY_PRESETS
from app.models.command import CommandOptions, CommandRequest, CommandType

LOG_FORMAT = "[%(asctime)s | %(levelname)s] %(message)s"

COMMAND_HELP = {
    CommandType.CHECKSAT: "Decide satisfiability of the query modulo the clauses",
    CommandType.SATURATE: "Saturate the constrained clauses",
    CommandType.ELIMINATE: "Eliminate the given predicates",
    CommandType.CONSTRAIN: "Synthesize the weakest parameter constraint",
    CommandType.INCLUSION: "Check inclusion between two defined classes",
    CommandType.EMIT_CHC: "Export a pure saturation as SMT-LIB Horn clauses",
    CommandType.ACCELERATE: "Accelerate a unit translation loop",
}


def _comma_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--theory", choices=sorted(THEORY_PRESETS), help="Distance axioms of the extension")
    common.add_argument("--psort-card", dest="psort_card", type=int, help="Number of points (default: infinite)")
    common.add_argument("--max-clauses", dest="max_clauses", type=int, help="Clause limit for saturation")
    common.add_argument("--max-dnf", dest="max_dnf", type=int, help="Bound on DNF/CNF conversions")
    common.add_argument("--bg-depth", dest="bg_depth", type=int, help="Instantiation depth of background axioms")
    common.add_argument("--precedence", help="Symbol precedence, highest first: 'E > F > d'")
    common.add_argument("--params", type=_comma_list, default=[], help="Comma-separated parameter symbols")
    common.add_argument("--ensure-valid", dest="ensure_valid", action="store_true",
                        help="Constrain the parameters so that every constrained clause holds")
    common.add_argument("--extra-terms", dest="extra_terms", help="Additional ground terms to instantiate with")
    common.add_argument("--solve-chc", dest="solve_chc", help="Command of an external CHC solver")
    common.add_argument("--trace", dest="trace_path", help="Write the inference trace to this file")
    common.add_argument("--config", type=Path, help="key=value configuration file")
    common.add_argument("--json", action="store_true", help="Print the machine-readable report mirror")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")

    parser = argparse.ArgumentParser(prog="soqe-kit", description="Second-order quantifier elimination toolkit")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, help_text in COMMAND_HELP.items():
        s = subparsers.add_parser(command.value, parents=[common], help=help_text)
        s.add_argument("problem", type=Path, help="Problem file")
        s.add_argument("arguments", nargs="*", help="Predicates or class names")
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    command = CommandType(args.command)

    try:
        settings = load_cli_settings(args.config, {
            "THEORY": args.theory,
            "PSORT_CARD": args.psort_card,
            "MAX_CLAUSES": args.max_clauses,
            "MAX_DNF": args.max_dnf,
            "BG_DEPTH": args.bg_depth,
            "PRECEDENCE": args.precedence,
            "SOLVE_CHC": args.solve_chc,
        })
    except (SoqeError, ValidationError) as exc:
        print(f"soqe-kit: {exc}", file=sys.stderr)
        return 1
    dispatcher = Dispatcher(settings)

    try:
        text = args.problem.read_text(encoding="utf-8")
    except OSError as exc:
        report = dispatcher.error_report(command.value, UsageError(f"cannot read {args.problem}: {exc}"))
    else:
        options = CommandOptions(
            theory=args.theory,
            params=args.params,
            ensure_valid=args.ensure_valid,
            extra_terms=args.extra_terms,
            trace_path=args.trace_path,
        )
        request = CommandRequest(problem=text, command=command, arguments=args.arguments, options=options)
        report = dispatcher.run(request)

    sys.stdout.write(report.mirror_json() + "\n" if args.json else report.render())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
