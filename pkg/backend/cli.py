"""
Command-line surface
Every subcommand routes through the orchestrator and writes CSV or JSON lines

Exit codes: 0 success, 1 usage / input error, 2 a theorem-backed check failed
"""
import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from backend.config import settings
from backend.errors import HexHeightError, TheoremCheckFailed
from backend.orchestrator import orchestrator
from backend.state import OutputFormat, RunConfig, Subcommand
from backend.utils.helpers import parse_rational
from backend.utils.report_writer import write_report
from backend.utils.run_logger import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2


class UsageError(Exception):
    """Bad command-line syntax"""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _int_list(text: str) -> List[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _rational_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _matrix(text: str) -> List[List[str]]:
    """"a,b;c,d" -> [["a","b"],["c","d"]]"""
    return [_rational_list(row) for row in text.split(";") if row.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed for randomized suites")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=settings.output_format)
    common.add_argument("--out", default=None, help="output file (written atomically); stdout when omitted")
    common.add_argument("--oracle", action="store_true", help="add brute-force / quadrature oracle columns")
    common.add_argument("--grid-exponent", type=int, default=settings.grid_exponent)
    common.add_argument("--trials", type=int, default=settings.trials)
    common.add_argument("--log-level", default=settings.log_level)

    parser = _Parser(prog="hexheight", description="Bernoulli local heights on abelian surfaces")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def triple_command(name: str, help_text: str) -> argparse.ArgumentParser:
        command = sub.add_parser(name, parents=[common], help=help_text)
        for entry in ("a", "b", "c"):
            command.add_argument(entry, type=int)
        return command

    triple_command("reduce", "normalize a triple and print the basis change")

    command = triple_command("eval-l", "evaluate L at a rational point")
    command.add_argument("x")
    command.add_argument("y")

    command = triple_command("fourier", "coefficient table for |m|, |n| <= M")
    command.add_argument("M", type=int, nargs="?", default=6)

    triple_command("hexagon", "hexagon vertices and region polygons")

    command = triple_command("avg-d", "closed-form d-average against direct enumeration")
    command.add_argument("x")
    command.add_argument("y")
    command.add_argument("d", type=int)

    command = sub.add_parser("local-bounds", parents=[common], help="randomized local bound suite")
    command.add_argument("--triple", type=int, nargs=3, metavar=("A", "B", "C"))
    command.add_argument("--d", type=int)
    command.add_argument("--max-points", type=int, default=12)

    command = sub.add_parser("theta", parents=[common], help="tropical theta identities")
    command.add_argument("--Q", type=_matrix, help='rows separated by ";", e.g. "2,1;1,2"')
    command.add_argument("--w", type=_rational_list, help='e.g. "1/2,0"')
    command.add_argument("--n", type=_int_list, help='e.g. "1,0"')

    command = sub.add_parser("simulate", parents=[common], help="run a scenario file")
    command.add_argument("scenario")

    command = sub.add_parser("holder", parents=[common], help="Holder-type inequality")
    command.add_argument("alpha", type=float)
    command.add_argument("beta", type=float)
    command.add_argument("e", type=float, nargs="+")

    command = sub.add_parser("scaling", parents=[common], help="single-branch scaling study")
    command.add_argument("--triple", type=int, nargs=3, metavar=("A", "B", "C"))
    command.add_argument("--points", type=int, default=12)
    command.add_argument("--n-values", type=_int_list)

    return parser


def _params(args: argparse.Namespace) -> Dict[str, Any]:
    """Subcommand parameters as the orchestrator expects them"""
    name = args.subcommand
    params: Dict[str, Any] = {}
    if hasattr(args, "a"):
        params.update(a=args.a, b=args.b, c=args.c)
    if name in ("eval-l", "avg-d"):
        params.update(x=parse_rational(args.x), y=parse_rational(args.y))
    if name == "avg-d":
        params["d"] = args.d
    if name == "fourier":
        params["M"] = args.M
    if name == "local-bounds":
        if args.triple:
            params.update(a=args.triple[0], b=args.triple[1], c=args.triple[2])
        if args.d is not None:
            params["d"] = args.d
        params["max_points"] = args.max_points
    if name == "theta" and args.Q is not None:
        if args.w is None or args.n is None:
            raise UsageError("theta needs --w and --n together with --Q")
        params.update(Q=args.Q, w=args.w, n=args.n)
    if name == "simulate":
        params.update(scenario=args.scenario, seed_given=args.seed is not None)
    if name == "holder":
        params.update(alpha=args.alpha, beta=args.beta, e=args.e)
    if name == "scaling":
        if args.triple:
            params["triple"] = tuple(args.triple)
        if args.n_values:
            params["n_values"] = args.n_values
        params["points"] = args.points
    return params


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point

    Args:
        argv: Arguments without the program name (sys.argv[1:] when None)

    Returns:
        Process exit code
    """
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level)
        config = RunConfig(
            subcommand=Subcommand(args.subcommand),
            params=_params(args),
            seed=args.seed if args.seed is not None else settings.default_seed,
            output_format=OutputFormat(args.format),
            output_path=args.out,
            oracle=args.oracle,
            grid_exponent=args.grid_exponent,
            trials=args.trials,
        )
        report = orchestrator.run(config)
        write_report(report, config.output_format, config.output_path, orchestrator.columns(config.subcommand))
    except TheoremCheckFailed as exc:
        logger.error("theorem-backed check failed: %s", exc)
        return EXIT_CHECK_FAILED
    except (UsageError, HexHeightError, ValueError, OSError) as exc:
        print(f"hexheight: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if report.failed:
        logger.error("%d checks failed, first: %s", len(report.failed), report.failed[0].detail)
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
