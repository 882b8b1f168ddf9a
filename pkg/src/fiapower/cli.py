"""Command-line entry point: ``fiapower <experiment> --config FILE``."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from .config import ConfigError, load_config
from .experiments import EXPERIMENTS, run_experiment, write_result
from .power_models import ConfigurationError, OverCapacityError
from .simulator import SimulationConfigError
from .topology import TopologyError
from .cache_sim import CacheConfigError
from .workload import TraceFormatError

log = logging.getLogger("fiapower")

USER_ERRORS = (ConfigError, ConfigurationError, OverCapacityError, SimulationConfigError,
               TopologyError, CacheConfigError, TraceFormatError)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fiapower",
        description="Energy model of router architectures and trace-driven caching experiments.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="YAML config; defaults apply to missing keys")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", default="results", help="output directory (default: results)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for simulations")
    p.add_argument("--no-plots", action="store_true", help="write CSVs only")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.jobs < 1:
        print("fiapower: error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config).with_seed(args.seed)
        log.info("running %s (seed %d)", args.experiment, cfg.seed)
        result = run_experiment(args.experiment, cfg, args.jobs)
        paths = write_result(result, cfg, args.out, plots=not args.no_plots)
    except USER_ERRORS as exc:
        print(f"fiapower: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"fiapower: error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
