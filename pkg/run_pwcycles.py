#!/usr/bin/env python3
"""
Main entry point for the pwcycles command line
"""
import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

from dotenv import load_dotenv
from pythonjsonlogger import jsonlogger

# Add project root to Python path
project_root = Path(__file__).parent.absolute()
sys.path.insert(0, str(project_root))

from core.command_handler import CommandHandler
from core.errors import EXIT_OK, EXIT_USAGE, PwCyclesError
from core.properties_configurator import PropertiesConfigurator
from core.run_config import DEFAULT_OUT_DIR, RunConfig, validate_run_config
from pwcycles.tolerances import OVERRIDE_FLAGS
from tools.base_command_tool import write_metrics
from tools.tools_registry import ToolsRegistry

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
OUT_ENV = 'PWCYCLES_OUT'

# namespace entries that never reach a command tool
CLI_ONLY = {'command', 'verbose', 'list'}


def setup_logging(verbose: bool = False, log_dir: str = 'logs'):
    """Console at WARNING (INFO with --verbose), JSON lines file at INFO"""
    os.makedirs(log_dir, exist_ok=True)
    console = logging.StreamHandler()
    console.setLevel(logging.INFO if verbose else logging.WARNING)
    console.setFormatter(logging.Formatter(LOG_FORMAT))

    file_handler = logging.FileHandler(os.path.join(log_dir, 'pwcycles.log'))
    file_handler.setLevel(logging.INFO)
    file_handler.setFormatter(jsonlogger.JsonFormatter(LOG_FORMAT))

    root = logging.getLogger()
    root.setLevel(logging.INFO)
    root.handlers = [console, file_handler]


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', dest='coefficients', help='Coefficient-table JSON file')
    common.add_argument('--out', help=f'Output directory (default: {DEFAULT_OUT_DIR}; {OUT_ENV} wins)')
    common.add_argument('--jobs', type=int, help='Worker threads (default: CPU count)')
    for flag in OVERRIDE_FLAGS:
        common.add_argument(f'--tol-{flag}', type=float, dest=f'tol_{flag.replace("-", "_")}',
                            help=f'Override the {OVERRIDE_FLAGS[flag]} tolerance')
    common.add_argument('--verbose', '-v', action='store_true', help='Enable verbose logging')
    return common


def _level_parser() -> argparse.ArgumentParser:
    level = argparse.ArgumentParser(add_help=False)
    level.add_argument('--k', type=int, required=True, help='Level of the family')
    level.add_argument('--epsilon', type=float, help='Base perturbation size')
    level.add_argument('--epsilon-vector', type=float, nargs='+', help='eps_1 .. eps_k')
    level.add_argument('--deep-level', action='store_true', help='Allow levels above the default cap')
    return level


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='Crossing limit cycles of piecewise polynomial vector fields',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''
Examples:
  %(prog)s construct --k 1
  %(prog)s count --k 2 --jobs 8
  %(prog)s levels --k 1 --grid 400 --contours 12
  %(prog)s melnikov --k 1
  %(prog)s pseudo-hopf --demo
  %(prog)s lift --input field.json --epsilon 1e-2
  %(prog)s sweep --k 1
  %(prog)s --list
        '''
    )
    parser.add_argument('--list', '-l', action='store_true', help='List available commands')
    sub = parser.add_subparsers(dest='command')
    common, level = _common_parser(), _level_parser()

    sub.add_parser('construct', parents=[common, level], help='Assemble the level-k field')

    count = sub.add_parser('count', parents=[common, level], help='Certify the cycles of levels 0..k')
    count.add_argument('--pseudo-hopf-mode', action='store_true', help='Also certify the pseudo-Hopf step at the origin (levels 0 and 1)')
    count.add_argument('--adaptive', action='store_true', help='Search a validated epsilon first')

    levels = sub.add_parser('levels', parents=[common], help='Level curves of H_k at eps = 0')
    levels.add_argument('--k', type=int, required=True, help='Level of the family')
    levels.add_argument('--grid', type=int, help='Samples per axis (default: 400)')
    levels.add_argument('--contours', type=int, help='Number of contour levels (default: 12)')
    levels.add_argument('--deep-level', action='store_true', help='Allow levels above the default cap')

    melnikov = sub.add_parser('melnikov', parents=[common, level], help='Melnikov oracle check')
    melnikov.add_argument('--schedule', type=float, nargs='+', help='Decreasing epsilon schedule')

    pseudo = sub.add_parser('pseudo-hopf', parents=[common], help='Pseudo-Hopf demo searches')
    mode = pseudo.add_mutually_exclusive_group()
    mode.add_argument('--demo', action='store_true', help='Two-fold demo field (default)')
    mode.add_argument('--focus-demo', action='store_true', help='Focus demo field')
    pseudo.add_argument('--b-magnitudes', type=float, nargs='+', help='Shift sizes |b|')

    lift = sub.add_parser('lift', parents=[common], help='Degree lift with the extra cycle')
    lift.add_argument('--input', help='Field JSON, optionally with "cycles"')
    lift.add_argument('--epsilon', type=float, help='Tilt of the lifted field')
    lift.add_argument('--b', dest='b_magnitude', type=float, help='Shift size |b|')

    sweep = sub.add_parser('sweep', parents=[common, level], help='Seed-free sign-change count')
    sweep.add_argument('--grid', type=int, help='Samples per unit of ordinate (default: 2000)')
    return parser


def resolve_out_dir(cli_out: Optional[str], props: PropertiesConfigurator) -> str:
    """PWCYCLES_OUT, then --out, then output.dir, then the default"""
    return os.environ.get(OUT_ENV) or cli_out or props.get('output.dir') or DEFAULT_OUT_DIR


def build_run_config(args: argparse.Namespace, props: PropertiesConfigurator) -> RunConfig:
    values = vars(args)
    tolerances = {}
    for flag in OVERRIDE_FLAGS:
        value = values.get(f'tol_{flag.replace("-", "_")}')
        if value is not None:
            tolerances[flag] = value
    config: Dict = {'command': args.command, 'out': resolve_out_dir(values.get('out'), props)}
    for key, value in values.items():
        if key in CLI_ONLY or key == 'out' or key.startswith('tol_'):
            continue
        if value is None or value is False:
            continue
        config[key] = value
    if tolerances:
        config['tolerances'] = tolerances
    return validate_run_config(config)


def print_commands(commands: List[Dict]):
    print("\nAvailable Commands:")
    print("-" * 60)
    for command in commands:
        print(f"\n{command['name']}")
        print(f"  {command['description']}")
    print()


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)

    props = PropertiesConfigurator([str(project_root / 'config' / 'application.properties')])
    setup_logging(getattr(args, 'verbose', False), props.get('log.dir', 'logs'))
    logger = logging.getLogger(__name__)

    registry = ToolsRegistry(str(project_root / 'config' / 'tools'))
    for name, error in registry.get_tool_errors().items():
        logger.warning(f"Command {name} not loaded: {error}")
    handler = CommandHandler(registry)

    if args.list:
        print_commands(handler.list_commands())
        return EXIT_OK
    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    try:
        config = build_run_config(args, props)
    except PwCyclesError as e:
        logger.error(e.message)
        return e.exit_code

    arguments = {key: value for key, value in config.items() if key != 'command'}
    outcome = handler.handle(config['command'], arguments)
    write_metrics(os.path.join(config['out'], 'metrics.prom'))

    print(json.dumps(outcome.to_dict(), indent=2, sort_keys=True))
    return outcome.exit_code


if __name__ == '__main__':
    sys.exit(main())
