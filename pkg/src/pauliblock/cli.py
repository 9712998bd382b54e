"""``simulate <config-path> [--out DIR] [--parallel N] [--verbose]``.

Exit status: 0 success, 1 finished with numerical warnings, 2 error.
The default output directory comes from PAULIBLOCK_OUT, else ./simulate_out.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import ConfigError, load_config
from .runner import execute

ENV_OUT = "PAULIBLOCK_OUT"
EXIT_OK, EXIT_WARN, EXIT_ERROR = 0, 1, 2

log = logging.getLogger("pauliblock")


def build_parser():
    p = argparse.ArgumentParser(prog="simulate", description="Run a Pauli-blocking scenario from a JSON config.")
    p.add_argument("config", help="path to the scenario config (JSON)")
    p.add_argument("--out", default=None, help=f"output directory (default: ${ENV_OUT} or ./simulate_out)")
    p.add_argument("--parallel", type=int, default=1, metavar="N", help="worker processes for scans")
    p.add_argument("--verbose", action="store_true", help="log progress to stderr")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.parallel < 1:
        print("error: --parallel must be at least 1", file=sys.stderr)
        return EXIT_ERROR
    out = args.out or os.environ.get(ENV_OUT) or "simulate_out"

    def report(msg, always=False):
        if always:
            print(msg)
        else:
            log.info(msg)

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_ERROR

    try:
        _, manifest = execute(cfg, out, args.parallel, report)
    except Exception as exc:  # surfaced with context, never a traceback
        print(f"error in scenario {cfg.scenario!r}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR

    for w in manifest["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_WARN if manifest["warnings"] else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
