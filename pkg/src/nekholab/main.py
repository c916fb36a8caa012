"""
Main entry point for nekholab.

Parses the global logging options, then hands the remaining arguments to
the click command group.
"""

import argparse
import sys
from typing import List, Optional

from . import __version__
from .utils.logger import setup_logging


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nekholab",
        description="nekholab - resonance geometry and stability-time laboratory",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  nekholab lattice complete --k 2,3
  nekholab envelope --n 3 --gamma 0.1666667
  nekholab simulate --spec configs/reference_n3.json --T 1000
  nekholab sweep --synthetic a=0.25
  nekholab selftest --certificate selftest.pdf
        """
    )

    parser.add_argument(
        '--version',
        action='version',
        version=f'nekholab {__version__}'
    )

    parser.add_argument(
        '--log-level',
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
        default='WARNING',
        help='Set logging level (default: WARNING)'
    )

    parser.add_argument(
        '--log-file',
        type=str,
        help='Path to log file (optional)'
    )

    parser.add_argument(
        'command',
        nargs=argparse.REMAINDER,
        help='Command and its options (see: nekholab --help-commands)'
    )

    parser.add_argument(
        '--help-commands',
        action='store_true',
        help='Show the command list'
    )

    return parser


def main(argv: Optional[List[str]] = None):
    """Main entry point for nekholab."""
    args = build_parser().parse_args(argv)

    logger = setup_logging(
        log_level=args.log_level,
        log_file=args.log_file,
        enable_console=True
    )

    from .cli.main import cli

    command = list(args.command) if not args.help_commands else ["--help"]
    if not command:
        command = ["--help"]

    logger.debug("nekholab starting", command=" ".join(command))

    try:
        cli.main(args=command, prog_name="nekholab", standalone_mode=True)
    except KeyboardInterrupt:
        logger.warning("Interrupted by user")
        sys.exit(3)


if __name__ == "__main__":
    main()
