#!/usr/bin/env python3
"""Command-line front end of the weighted-inequality lab.

Every subcommand prints one JSON record ``{inputs, results, provenance}`` on
stdout; logs go to stderr. Lab failures print ``{"error": {...}}`` and exit
with status 2.

Example:
    $ python lab_cli.py --dim 2 sweep sobolev --p 1 --deltas 0.5
    $ python lab_cli.py decompose cz --f x --height 0.5
    $ python lab_cli.py transform hilbert --f charfn:-1:1 --domain=-2:2
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Any, Sequence

from lab_config import LabConfig, configure_logging, load_config
from lab_errors import LabError
from lab_operations import FAMILY_KINDS, run_operation, to_jsonable
from sharpness_lab import SWEEPS

logger = logging.getLogger(__name__)

# global flags that map onto LabConfig fields
_CONFIG_FLAGS = {
    "dim": "dimension",
    "resolution": "resolution",
    "seed": "seed",
    "tol": "tolerance",
    "quad_tol": "quad_tolerance",
    "levels": "levels",
    "out": "output_path",
    "log_level": "log_level",
}


def parse_levels(text: str) -> tuple[int, int]:
    """``"a..b"`` into an inclusive level window."""
    lo, sep, hi = text.partition("..")
    try:
        window = (int(lo), int(hi)) if sep else (int(lo), int(lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels must look like -8..-2, got '{text}'") from None
    if window[0] > window[1]:
        raise argparse.ArgumentTypeError(f"empty level window '{text}'")
    return window


def _add_function_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--domain', metavar='LO:HI',
                        help='Sampling box, same interval on every axis (default: 0:1); '
                             'write negative bounds as --domain=-1:1')
    parser.add_argument('--var', action='append', metavar='NAME=VALUE',
                        help='Variable usable in function and Young ids (repeatable)')


def _add_family_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--family', choices=FAMILY_KINDS,
                        help='Cube family for suprema (default: dyadic+domain)')


def _add_global_options(parser: argparse.ArgumentParser, default: Any = None) -> None:
    """Flags accepted before or after the subcommand.

    Subcommands get them with ``argparse.SUPPRESS`` so an absent flag keeps
    whatever the top-level parser read.
    """
    parser.add_argument('--dim', type=int, default=default, help='Spatial dimension n (default: 1)')
    parser.add_argument('--resolution', type=int, default=default, help='Grid resolution exponent L')
    parser.add_argument('--levels', type=parse_levels, metavar='A..B', default=default,
                        help='Inclusive dyadic level window')
    parser.add_argument('--seed', type=int, default=default, help='Seed for randomized estimates')
    parser.add_argument('--tol', type=float, default=default, help='Bisection relative tolerance')
    parser.add_argument('--quad-tol', type=float, default=default, help='Quadrature relative tolerance')
    parser.add_argument('--out', metavar='FILE', default=default,
                        help='CSV output (sweep table or sampled result)')
    parser.add_argument('--config', metavar='FILE', default=default, help='JSON config file mirroring the flags')
    parser.add_argument('--log-level', default=default, help='Logging level (default: WARNING)')
    parser.add_argument('--delta', metavar='EXPR', default=default,
                        help="Value of δ (also 'delta') in function, Young and parameter expressions")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='lab_cli',
        description='Numerical lab for sharp weighted inequalities of commutators',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # A_{p,q} lattice constant of a power weight
  python lab_cli.py --dim 1 --resolution 10 apq --w power:-0.5 --p 2 --q 2

  # The same with the exponent written in n, δ and p'
  python lab_cli.py apq --w "power:(n-δ)/p'" --p 4/3 --q 4 --dim 2 --delta 0.2

  # Luxemburg norm in L log L
  python lab_cli.py luxemburg --f x --young llogl

  # Lerner decomposition of a random step function
  python lab_cli.py --resolution 8 decompose lerner --f randpc:3:16

  # Sobolev sharpness sweep written as CSV
  python lab_cli.py --dim 2 --out sobolev.csv sweep sobolev --p 1
        """
    )
    _add_global_options(parser)
    common = argparse.ArgumentParser(add_help=False)
    _add_global_options(common, argparse.SUPPRESS)

    commands = parser.add_subparsers(dest='command', required=True)

    lux = commands.add_parser('luxemburg', parents=[common], help='Luxemburg norm on the domain cube')
    lux.add_argument('--f', required=True, help='Function id or csv:<path>')
    lux.add_argument('--young', required=True, help='Young function id, e.g. logbump:2:1')
    _add_function_options(lux)

    maximal = commands.add_parser('maximal', parents=[common], help='Orlicz maximal function')
    maximal.add_argument('--f', required=True)
    maximal.add_argument('--young', default='power:1')
    maximal.add_argument('--alpha', default=None, help='Fractional order in [0, n)')
    maximal.add_argument('--flavor', choices=('dyadic', 'all-cubes'), default='dyadic')
    _add_function_options(maximal)

    apq = commands.add_parser('apq', parents=[common], help='A_{p,q} lattice constant')
    apq.add_argument('--w', required=True)
    apq.add_argument('--p', required=True)
    apq.add_argument('--q')
    _add_function_options(apq)
    _add_family_option(apq)

    bump = commands.add_parser('bump', parents=[common], help='Two-weight (fractional) bump constant')
    bump.add_argument('--u', required=True)
    bump.add_argument('--v', required=True)
    bump.add_argument('--A', required=True, help='Young function on the u side')
    bump.add_argument('--B', required=True, help='Young function on the v side')
    bump.add_argument('--p', default='2')
    bump.add_argument('--q')
    bump.add_argument('--alpha', default=None)
    _add_function_options(bump)
    _add_family_option(bump)

    bmo = commands.add_parser('bmo', parents=[common], help='BMO lattice norm')
    bmo.add_argument('--b', required=True)
    _add_function_options(bmo)
    _add_family_option(bmo)

    transform = commands.add_parser('transform', parents=[common], help='Apply an operator or its commutator')
    transform.add_argument('op',
                           help='hilbert, haarshift:petermichl, ialpha:<a> or ialphad:<a>')
    transform.add_argument('--f', required=True)
    transform.add_argument('--commutator-symbol', metavar='FN', help='Wrap the operator in [b, .]')
    transform.add_argument('--estimate-norm', action='store_true',
                           help='Also estimate the L2 operator norm')
    _add_function_options(transform)

    decompose = commands.add_parser('decompose', parents=[common], help='CZ or Lerner decomposition tree')
    decompose.add_argument('mode', choices=('cz', 'lerner'))
    decompose.add_argument('--f', required=True)
    decompose.add_argument('--height', help='Single CZ height (cz mode)')
    decompose.add_argument('--base', help='Height base a of the CZ tree (default 4^n)')
    _add_function_options(decompose)

    sweep = commands.add_parser('sweep', parents=[common], help='Sharpness sweep over δ or radii')
    sweep.add_argument('name', choices=sorted(SWEEPS))
    sweep.add_argument('--p')
    sweep.add_argument('--q')
    sweep.add_argument('--alpha')
    sweep.add_argument('--k')
    sweep.add_argument('--deltas', help='Comma-separated δ list')
    sweep.add_argument('--radii', help='Comma-separated radius list')
    sweep.add_argument('--tail-fraction')
    sweep.add_argument('--with-constant', action='store_true', default=None,
                       help='Add the lattice A_{p,q} constant per δ')
    sweep.add_argument('--cross-check', action='store_true', default=None,
                       help='Compare against the discretized I_α')

    return parser


def resolve_config(args: argparse.Namespace, environ: dict[str, str] | None = None) -> LabConfig:
    """Defaults < environment < config file < explicit flags."""
    config = LabConfig.from_env(environ)
    if args.config:
        config = config.merged(load_config(args.config))
    overrides = {field: getattr(args, flag) for flag, field in _CONFIG_FLAGS.items()}
    return config.merged(overrides)


def command_params(args: argparse.Namespace, config: LabConfig) -> dict[str, Any]:
    """Subcommand parameters as a plain mapping for :mod:`lab_operations`."""
    skip = set(_CONFIG_FLAGS) | {'config', 'command'}
    params = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    params['output_path'] = config.output_path
    if args.command == 'sweep':
        if args.resolution is not None:
            params['sweep_resolution'] = config.resolution
        elif params['name'] != 'power-weight':
            params['sweep_resolution'] = config.sweep_resolution_for(config.dimension)
    return params


def _emit(record: dict[str, Any], stream=None) -> None:
    stream = stream or sys.stdout
    json.dump(to_jsonable(record), stream, indent=2)
    stream.write("\n")


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point; returns the process exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = resolve_config(args)
        configure_logging(config.log_level)
        record = run_operation(args.command, config, command_params(args, config))
    except LabError as err:
        logger.error("Command failed", extra={"command": args.command, "code": err.code})
        _emit({"error": err.to_dict()})
        return 2

    _emit(record)
    return 0


def cli_main() -> None:
    sys.exit(main())


if __name__ == '__main__':
    cli_main()
