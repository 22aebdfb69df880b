import argparse
import importlib
import sys
from typing import List, Optional

from planefix import LOGGER, __version__, application
from planefix.modules import ALL_MODULES

# Import all modules declared in ALL_MODULES
for module_name in ALL_MODULES:
    importlib.import_module("planefix.modules." + module_name)

EXAMPLES = ("1_2", "4_5")
USAGE_EXIT = 4


class PlanefixParser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 4), not hypothesis violations."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        LOGGER.error(f"❌ {message}")
        sys.exit(USAGE_EXIT)


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--eps-sep", type=float, default=None, help="separation margin")
    parser.add_argument("--tol-fix", type=float, default=None, help="fixed-point box diameter")
    parser.add_argument("--grid-pitch", type=float, default=None, help="complement decomposition pitch")
    parser.add_argument("--seed-jitter", type=int, default=None, help="seed for the subdivision jitter")
    parser.add_argument("--json-report", metavar="PATH", default=None, help="also write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    parser = PlanefixParser(
        prog="planefix",
        description="Fixed-point certification for plane maps: QIVT checks, outflanking arcs, degree search.",
    )
    parser.add_argument("--version", action="version", version=f"planefix {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for name in application.names():
        handler = application.get(name)
        cmd = sub.add_parser(name, help=handler.help, description=handler.help)
        if handler.takes_file:
            cmd.add_argument("file", help="scenario file")
        else:
            cmd.add_argument("example", choices=EXAMPLES, help="builtin example")
            cmd.add_argument("params", nargs="*", metavar="key=value", help="example parameters")
        if name in ("render", "example"):
            cmd.add_argument("-o", "--output", default=None, help="drawing output (.svg or .png)")
        _add_shared_flags(cmd)
        cmd.set_defaults(callback=handler.callback)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    LOGGER.debug(f"Dispatching '{args.command}'")
    return int(args.callback(args))


if __name__ == "__main__":
    sys.exit(main())
