"""Command-line entry point: ``python -m core {forward,invert,verify,sweep} --config FILE``."""

from __future__ import annotations

import argparse
import logging
import sys

from core.exceptions import InversionError
from core.pipeline import COMMANDS
from core.validation import load_config

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

HELP = {
    "forward": "Synthesize boundary data and chain fields for the configured profile",
    "invert": "Reconstruct sigma from synthetic or measured data",
    "verify": "Monte-Carlo checks of the Carleman estimate, convexity and the gradient",
    "sweep": "One inversion per combination of list-valued epsilon/lambda/delta",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="core", description="Convexified 1-D conductivity inversion")
    sub = parser.add_subparsers(dest="cmd", required=True)
    for name, help_text in HELP.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="Path to a YAML/JSON config (defaults apply when omitted)")
        p.add_argument("--out", help="Output directory (overrides output_dir)")
        p.add_argument("--seed", type=int, help="Random seed (overrides seed)")
        p.add_argument("--threads", type=int, help="Worker threads, 0 = one per CPU (overrides threads)")
        p.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return parser


def main(argv: list[str] | None = None) -> int:
    """Run one command; returns the process exit status."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT)
    try:
        config = load_config(args.config, output_dir=args.out, seed=args.seed, threads=args.threads)
        outputs = COMMANDS[args.cmd](config)
    except InversionError as exc:
        logger.error("%s failed: %s", args.cmd, exc)
        return 1
    for path in outputs:
        logger.info("output %s", path)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
