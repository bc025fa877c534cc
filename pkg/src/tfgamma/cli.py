"""Command line entry point: ``tfgamma <experiment> --config FILE --out DIR``."""

from __future__ import annotations

import argparse
import logging
import sys
import time

from .errors import NumericalError, TFGammaError, ValidationError
from .experiments import EXPERIMENTS, RUNNERS, PartialReportError, emit, load_config

log = logging.getLogger("tfgamma")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tfgamma", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="flat key = <json> configuration file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--workers", type=int, default=1, help="parallel jobs (default 1)")
        p.add_argument("--log-level", choices=("info", "debug"), default="info")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper()),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    if args.workers < 1:
        log.error("--workers must be at least 1")
        return EXIT_VALIDATION
    start = time.perf_counter()
    try:
        cfg = load_config(args.config, args.command)
        report = RUNNERS[args.command](cfg, workers=args.workers)
    except PartialReportError as exc:
        emit(exc.report, args.out, {"total": time.perf_counter() - start})
        log.error("run failed after %d rows: %s", len(exc.report.rows), exc.cause)
        return EXIT_VALIDATION if isinstance(exc.cause, ValidationError) else EXIT_NUMERIC
    except ValidationError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_VALIDATION
    except (NumericalError, TFGammaError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    elapsed = time.perf_counter() - start
    try:
        files = emit(report, args.out, {"total": elapsed})
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    log.info("wrote %s to %s in %.2f s", ", ".join(files), args.out, elapsed)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
