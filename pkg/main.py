import sys
from argparse import ArgumentParser

from config import settings
from tools import building, play, probing, proofs, tables
from utilities import dependencies
from utilities.logging import initialize_logging


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError(text)
    return value


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="rookmate",
        description="K+R vs K tablebases on m x n boards: build, query, reproduce and prove",
        epilog="Example: python main.py build 3 8 tb38.rktb",
    )
    parser.add_argument(
        "--workers",
        type=_positive,
        help="worker threads for building (default: physical cores; affects speed only)",
    )
    parser.add_argument(
        "--no-cache",
        action="store_true",
        help="Do not read or write the on-disk tablebase cache",
    )
    parser.add_argument(
        "--debug",
        action="store_true",
        help="Enable debug mode with verbose logging",
    )

    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    building.register(subparsers)
    probing.register(subparsers)
    tables.register(subparsers)
    proofs.register(subparsers)
    play.register(subparsers)
    return parser


def parse_command_line_args(argv: list[str] | None = None):
    """Parse the command line and copy the global flags onto settings."""
    args = build_parser().parse_args(argv)

    if args.workers:
        settings.RKTB_WORKERS = args.workers
    if args.no_cache:
        settings.USE_CACHE = False
    if args.debug:
        settings.DEBUG = True

    return args


def main(argv: list[str] | None = None) -> int:
    args = parse_command_line_args(argv)
    initialize_logging()
    dependencies.logger.debug(
        f"Command: {args.command} | workers: {dependencies.resolve_workers()} | cache: {settings.USE_CACHE}"
    )
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
