import argparse
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import NoReturn

from lilyvoc.commands import eval as eval_command
from lilyvoc.commands import extract, synth, train
from lilyvoc.config import configure_logging, log_settings
from lilyvoc.error import (
    BadRequestError,
    ErrorHandler,
    handle_error,
    register_error_handlers,
)


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors go through the error handlers like any other user error."""

    def error(self, message: str) -> NoReturn:
        raise BadRequestError(f"{message}.")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="lilyvoc", description="Instructed harmonic-plus-noise GAN vocoder."
    )
    parser.add_argument("--config", type=Path, help="Run configuration file.")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override one configuration key; repeatable, wins over --config.",
    )
    parser.add_argument("--log-level", help="Overrides LILYVOC_LOG_LEVEL.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Register commands.
    extract.register(subparsers)
    train.register(subparsers)
    synth.register(subparsers)
    eval_command.register(subparsers)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    handlers: dict[type[Exception], ErrorHandler] = {}
    register_error_handlers(handlers)
    try:
        args = build_parser().parse_args(argv)
        configure_logging(log_settings, args.log_level)
        return int(args.handler(args))
    except Exception as error:
        return handle_error(handlers, error)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
