"""argparse surface: one subcommand per computation, shared flags on every subcommand"""
import argparse
from typing import Any, Dict, List
from app.cli.schemas import DEFAULT_PHIS, Command
from app.core.config import settings
from app.core.exceptions import UsageError


class ToolkitParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting with status 2"""

    def error(self, message: str):
        raise UsageError(f"{self.format_usage().rstrip()}\n{self.prog}: error: {message}")


def _shared_flags() -> argparse.ArgumentParser:
    # SUPPRESS keeps unset flags out of the namespace so config values survive
    flags = ToolkitParser(add_help=False, argument_default=argparse.SUPPRESS)
    flags.add_argument("--config", help="key=value file; flags override its values")
    flags.add_argument("--dim", type=int, help="dimension d >= 2 (default 2)")
    flags.add_argument("--phi", type=float, help="mean offset, mean = -1+phi")
    flags.add_argument("--length", type=float, help="torus side L")
    flags.add_argument("--xi", help="critical scaling phi L^(d/(d+1)), or 'inf'")
    flags.add_argument("--grid", type=int, help="cells per axis n (default L / 0.5, even)")
    flags.add_argument("--images", type=int, help="path images (default 32)")
    flags.add_argument("--R", type=float, help="clamping half-width of the kink profile")
    flags.add_argument("--kappa", type=float, help="transition width of the partition weights")
    flags.add_argument("--samples", type=int, help="reduced curve samples (default 1000)")
    flags.add_argument(
        "--threads",
        type=int,
        help=f"worker threads (default CHB_THREADS or cores, now {settings.WORKER_COUNT})",
    )
    flags.add_argument("--out", help="output file (reduced) or directory")
    flags.add_argument("--radius", type=float, help="limit ball radius for gamma (default 1.0)")
    flags.add_argument(
        "--phis", help=f"comma-separated decreasing phis for gamma (default {','.join(map(str, DEFAULT_PHIS))})"
    )
    flags.add_argument("--field", help="CHF1 snapshot to certify")
    flags.add_argument("--snapshots", action="store_true", help="write per-image CHF1 snapshots")
    flags.add_argument("--max-iter", dest="max_iter", type=int, help="string method iteration cap")
    flags.add_argument("--step", type=float, help="string method explicit step")
    flags.add_argument("--tol", type=float, help="string method force tolerance")
    return flags


def build_parser() -> ToolkitParser:
    parser = ToolkitParser(
        prog="chb",
        description="Energy-landscape computations for the Cahn-Hilliard energy on a flat torus",
    )
    parser.add_argument("--version", action="version", version=f"{settings.APP_NAME} {settings.APP_VERSION}")
    shared = _shared_flags()
    commands = parser.add_subparsers(dest="command", metavar="command", parser_class=ToolkitParser)
    descriptions = {
        Command.CONSTANTS: "closed-form constants c0, cbar1, xi_d, C*, nu_m",
        Command.REDUCED: "sample the reduced energy f_xi",
        Command.CERTIFY: "certified lower bounds (and a field's certificate)",
        Command.PATH: "construct the seed/droplet barrier path",
        Command.SADDLE: "relax the path and refine the saddle",
        Command.GAMMA: "recovery-sequence convergence sweep",
    }
    for command, description in descriptions.items():
        commands.add_parser(command.value, parents=[shared], help=description, description=description)
    return parser


def parse_arguments(argv: List[str]) -> Dict[str, Any]:
    """
    Parse argv into a dict holding only the options actually given

    Raises:
        UsageError: unknown flag, bad value or missing command
    """
    namespace = build_parser().parse_args(argv)
    options = vars(namespace)
    if not options.get("command"):
        raise UsageError(f"{build_parser().format_usage().rstrip()}\nchb: error: a command is required")
    return options
