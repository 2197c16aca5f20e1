"""
Command Line.

Subcommands map onto the inversion workflow: ``synth``, ``train``,
``predict``, ``eval``, ``segy-convert`` and ``gradcheck``. Exit codes:
0 success, 1 usage error, 2 data or configuration error, 3 runtime
failure. Diagnostics go to standard error; outputs go to the named files.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import List, NoReturn, Optional, Sequence

from inversion import app_config
from inversion.configs import VARIANTS, describe_defaults
from inversion.errors import ConfigError, DataError, InversionError
from inversion.geodata.grid import GridKind
from inversion.services import InversionService, apply_cli_overrides, load_run_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


class UsageError(Exception):
    """Raised by the argument parser instead of exiting."""


class ArgumentParser(argparse.ArgumentParser):
    """An ArgumentParser that reports bad arguments by raising UsageError."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def parse_columns(text: str) -> List[int]:
    """Parses ``a,b,c`` into column indices."""
    try:
        columns = [int(part) for part in text.split(',') if part.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"invalid column list '{text}'") from err
    if any(col < 0 for col in columns):
        raise argparse.ArgumentTypeError(f"column indices must be >= 0, got '{text}'")
    return columns


######################################################################
# PARSER
######################################################################
def build_parser() -> ArgumentParser:
    """Builds the top-level parser with every subcommand."""
    parser = ArgumentParser(
        prog='impedance-inversion',
        description='Seismic acoustic-impedance inversion with 2-D temporal '
                    'convolutional networks.',
        epilog='run configuration defaults (--config JSON sections):\n' + describe_defaults(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('--version', action='version',
                        version=f"%(prog)s {app_config.version}")
    commands = parser.add_subparsers(dest='command', metavar='COMMAND',
                                     parser_class=ArgumentParser)
    commands.required = True

    synth = commands.add_parser('synth', help='generate a synthetic section with wells')
    synth.add_argument('--config', help='run configuration JSON')
    synth.add_argument('--out', help='output data directory (default: config data_dir)')
    synth.add_argument('--seed', type=int, help='override synth and train seeds')

    train = commands.add_parser('train', help='train a network on a data directory')
    train.add_argument('--config', help='run configuration JSON')
    train.add_argument('--data', help='data directory (default: config data_dir)')
    train.add_argument('--out', help='checkpoint directory (default: config out_dir)')
    train.add_argument('--variant', choices=VARIANTS, help='network variant')
    train.add_argument('--seed', type=int, help='override synth and train seeds')

    predict = commands.add_parser('predict', help='predict an impedance section')
    predict.add_argument('--config', help='run configuration JSON')
    predict.add_argument('--ckpt', required=True, help='checkpoint directory')
    predict.add_argument('--data', help='data directory (default: config data_dir)')
    predict.add_argument('--out', help='output directory (default: config out_dir)')
    predict.add_argument('--columns', type=parse_columns, default=[],
                         help='columns to export as traces.csv, e.g. 10,40')

    evaluate = commands.add_parser('eval', help='score predictions against the true section')
    evaluate.add_argument('--config', help='run configuration JSON')
    evaluate.add_argument('--ckpt', required=True, help='checkpoint directory')
    evaluate.add_argument('--data', help='data directory (default: config data_dir)')
    evaluate.add_argument('--report', required=True, help='report JSON path')
    evaluate.add_argument('--columns', type=parse_columns, default=[],
                          help='columns to export beside the report')

    convert = commands.add_parser('segy-convert', help='convert SEG-Y to SGRD')
    convert.add_argument('--input', help='SEG-Y line to convert')
    convert.add_argument('--density', help='density SEG-Y (with --velocity)')
    convert.add_argument('--velocity', help='P-velocity SEG-Y (with --density)')
    convert.add_argument('--out', required=True, help='output SGRD file')
    convert.add_argument('--dx', type=float, required=True, help='trace spacing (m)')
    convert.add_argument('--dz', type=float,
                         help='vertical interval; default keeps the SEG-Y time interval')
    convert.add_argument('--kind', choices=[k.value for k in GridKind],
                         default=GridKind.SEISMIC.value, help='grid kind for --input')

    gradcheck = commands.add_parser('gradcheck', help='run the gradient verification suite')
    gradcheck.add_argument('--trials', type=int, default=100, help='number of checks')
    gradcheck.add_argument('--seed', type=int, default=app_config.default_seed,
                           help='suite seed')
    return parser


######################################################################
# COMMANDS
######################################################################
def _directory(given: Optional[str], configured: Optional[str], flag: str, field: str) -> str:
    """Picks the command-line directory, else the run configuration's."""
    if given is not None:
        return given
    if configured is None:
        raise ConfigError(f"{flag} was not given and the run configuration has no {field}")
    return configured


def _service(args: argparse.Namespace) -> InversionService:
    config = load_run_config(args.config)
    seed = args.seed if 'seed' in args else None
    if args.config is None and seed is None:
        seed = app_config.default_seed
    variant = args.variant if 'variant' in args else None
    return InversionService(apply_cli_overrides(config, variant=variant, seed=seed))


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == 'gradcheck':
        reports = InversionService.gradcheck(args.trials, args.seed)
        failed = sorted({r.name for r in reports if not r.passed})
        if failed:
            logger.error("Gradient checks failed: %s", ', '.join(failed))
            return EXIT_RUNTIME
        return EXIT_OK
    if args.command == 'segy-convert':
        InversionService.convert_segy(
            args.out, args.dx, input_path=args.input, density_path=args.density,
            velocity_path=args.velocity, dz=args.dz, kind=GridKind(args.kind),
        )
        return EXIT_OK

    service = _service(args)
    config = service.config
    if args.command == 'synth':
        service.synthesize(_directory(args.out, config.data_dir, '--out', 'data_dir'))
        return EXIT_OK
    data = _directory(args.data, config.data_dir, '--data', 'data_dir')
    if args.command == 'train':
        service.train(data, _directory(args.out, config.out_dir, '--out', 'out_dir'))
    elif args.command == 'predict':
        service.predict(args.ckpt, data,
                        _directory(args.out, config.out_dir, '--out', 'out_dir'),
                        args.columns)
    elif args.command == 'eval':
        service.evaluate(args.ckpt, data, args.report, args.columns)
    return EXIT_OK


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Parses ``argv``, runs the subcommand and returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(err, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as err:
        # --help and --version
        return int(err.code or 0)

    logger.info("'%s' %s: %s", app_config.name, app_config.version, args.command)
    try:
        return _dispatch(args)
    except DataError as err:
        logger.error("%s: %s", type(err).__name__, err.message)
        return EXIT_DATA
    except InversionError as err:
        logger.error("%s: %s", type(err).__name__, err.message)
        return EXIT_RUNTIME
    except Exception as err:  # pylint: disable=broad-exception-caught
        logger.exception("Unexpected failure: %s", err)
        return EXIT_RUNTIME


def main() -> None:
    """Console entry point."""
    sys.exit(run_cli())
