# MODULES
import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, NoReturn, Optional

# CONFIG
from pystrat_wave._config import load_config

# CONSTANTS
from pystrat_wave._constants.enum import Subcommand

# EXCEPTIONS
from pystrat_wave._exceptions import ConfigError, ModelError

# REPOSITORY
from pystrat_wave._repository import RunRepository

# SERVICE
from pystrat_wave._wave_service import Report, WaveService

_logger = logging.getLogger("pystrat_wave.cli")

EXIT_OK = 0
EXIT_MODEL = 1
EXIT_USAGE = 2


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = _ArgumentParser(
        prog="pystrat_wave",
        description="Solvers and symmetry diagnostics for steady stratified periodic water waves.",
    )
    parser.add_argument(
        "subcommand",
        choices=[item.value for item in Subcommand],
        help="The operation to run.",
    )
    parser.add_argument("config", type=Path, help="The `key = value` configuration file.")
    parser.add_argument(
        "--output",
        dest="output_dir",
        type=Path,
        help="Run directory, overriding output_dir of the configuration.",
    )
    parser.add_argument(
        "--field",
        type=Path,
        help="Stored height field CSV or stream solution directory.",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Lower the log level, repeat for debug records.",
    )
    return parser.parse_args(argv)


def _configure_logging(verbose: int) -> None:
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.getLogger("pystrat_wave").setLevel(level)


def _dispatch(service: WaveService, subcommand: Subcommand, field: Optional[Path]) -> Report:
    handlers: Dict[Subcommand, Callable[[], Report]] = {
        Subcommand.LAMINAR: service.laminar,
        Subcommand.DISPERSION: service.dispersion,
        Subcommand.SOLVE_HEIGHT: lambda: service.solve_height()[1],
        Subcommand.CONTINUE: lambda: {"points": len(service.continue_branch().points)},
        Subcommand.SOLVE_STREAM: lambda: service.solve_stream()[1],
        Subcommand.STAGNATION: lambda: service.stagnation(field),
        Subcommand.SYMMETRY_CHECK: lambda: service.symmetry_check(field),
        Subcommand.VALIDATE_MP: lambda: service.validate_max_principle(field),
    }
    return handlers[subcommand]()


def main(argv: Optional[List[str]] = None) -> int:
    """
    Runs one subcommand.

    Args:
        argv (Optional[List[str]], optional): The arguments, sys.argv[1:] when None. Defaults to None.

    Returns:
        int: 0 on success, 1 when the model hypotheses fail, 2 on usage or configuration errors.
    """
    try:
        args = _parse_args(argv)
    except _UsageError as error:
        print(f"usage error: {error}", file=sys.stderr)
        return EXIT_USAGE

    _configure_logging(args.verbose)

    try:
        config = load_config(args.config)
    except ConfigError as error:
        for line, key, message in error.diagnostics:
            location = f"line {line}" if line is not None else "config"
            print(f"{args.config}: {location}: {key or '-'}: {message}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as error:
        print(f"cannot read {args.config}: {error}", file=sys.stderr)
        return EXIT_USAGE

    output_dir = args.output_dir if args.output_dir is not None else config.output_dir
    service = WaveService(
        repository=RunRepository(output_dir),
        config=config,
        logger=_logger,
    )
    service.write_meta()

    subcommand = Subcommand(args.subcommand)
    try:
        report = _dispatch(service, subcommand, args.field)
    except ModelError as error:
        _logger.error("%s failed: %s", subcommand.value, error, exc_info=True)
        print(f"{subcommand.value}: {type(error).__name__}: {error}", file=sys.stderr)
        return EXIT_MODEL
    except (OSError, ValueError) as error:
        _logger.error("%s failed: %s", subcommand.value, error, exc_info=True)
        print(f"{subcommand.value}: {error}", file=sys.stderr)
        return EXIT_USAGE

    for key, value in report.items():
        print(f"{key} = {value}")

    return EXIT_OK
