"""
Power-Flow Gauss-Newton Bench - Main Application

A command-line application that runs the power-flow recovery experiment:
build a target injection from a chosen state x*, solve with MPG-N and/or
projected gradient descent from a seeded feasible start, and write trace
CSVs plus summaries.

Usage:
    python main.py --case case14 --solver both --seed 1
"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import List, Sequence

from src.data.case_reader import BUILTIN_CASES, CaseReader
from src.experiment.runner import (SOLVER_CHOICES, START_CHOICES, ExperimentConfig,
                                   ExperimentRunner, parse_seeds, seed_sweep)
from src.output.summary_exporter import SummaryReport, aggregate, to_record, to_text
from src.solvers.results import SolveStatus
from src.utils.settings import load_settings, setup_logging


def parse_arguments() -> argparse.Namespace:
    """
    Parse command-line arguments.

    Returns:
        Parsed arguments namespace
    """
    parser = argparse.ArgumentParser(
        description='Compare modified projected Gauss-Newton with projected gradient descent on power flow',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Both solvers on the bundled IEEE 14-bus case, seed 1
  python main.py --case case14 --solver both --seed 1

  # Seed sweep in four worker threads
  python main.py --case case57 --seeds 1-10 --workers 4 --out results/case57

  # MPG-N only from a MATPOWER file, flat x* and flat start
  python main.py --case cases/case2.m --solver mpgn --xstar flat --start flat

Bundled cases: case14, case39, case57, case118. Other cases are read from
MATPOWER .m files.
        """
    )

    parser.add_argument(
        '--case',
        help='MATPOWER case file or bundled case name (default: from settings)'
    )

    parser.add_argument(
        '--solver',
        choices=SOLVER_CHOICES,
        help='Solver(s) to run (default: both)'
    )

    seeds = parser.add_mutually_exclusive_group()
    seeds.add_argument(
        '--seed',
        type=int,
        help='Seed for the x* and start-point draws (default: 1)'
    )
    seeds.add_argument(
        '--seeds',
        help='Seed sweep, e.g. 1-10 or 1,4,9'
    )

    parser.add_argument(
        '--tol',
        type=float,
        help='Stopping tolerance on ||F(x)|| (default: 1e-3)'
    )

    parser.add_argument(
        '--max-iters',
        type=int,
        dest='max_iters',
        help='Outer iteration cap (default: 5000)'
    )

    parser.add_argument('--delta', type=float, help='MPG-N descent margin (default: 1e-4)')
    parser.add_argument('--l0', type=float, help='MPG-N regularization floor (default: 1e-4)')
    parser.add_argument('--m0', type=float, help='MPG-N starting regularization (default: 1.0)')

    parser.add_argument(
        '--xstar',
        help='Target state: flat, random, or a CSV file with columns u,theta (default: random)'
    )

    parser.add_argument(
        '--start',
        choices=START_CHOICES,
        help='Starting point: seeded random feasible draw or flat (default: random)'
    )

    parser.add_argument(
        '--angle-spread',
        type=float,
        dest='angle_spread',
        help='Half-width in radians of the angles drawn for random x* and starts (default: 0.2)'
    )

    parser.add_argument(
        '--out',
        help='Output directory for traces and summaries (default: from settings)'
    )

    parser.add_argument(
        '--workers',
        type=int,
        help='Worker threads for seed sweeps (default: 1)'
    )

    parser.add_argument(
        '--config',
        default='settings.ini',
        help='Path to configuration file (default: settings.ini)'
    )

    parser.add_argument(
        '--verbose', '-v',
        action='store_true',
        help='Enable verbose logging'
    )

    return parser.parse_args()


def validate_inputs(args: argparse.Namespace) -> None:
    """
    Validate command-line arguments.

    Args:
        args: Parsed arguments

    Raises:
        SystemExit: If validation fails
    """
    logger = logging.getLogger(__name__)

    if args.case:
        reader = CaseReader(args.config)
        if reader.resolve(args.case) is None and args.case not in BUILTIN_CASES:
            logger.error(f"Case not found: {args.case}")
            logger.info(f"Bundled cases: {', '.join(BUILTIN_CASES)}")
            sys.exit(1)

    if args.xstar and args.xstar not in ('flat', 'random'):
        xstar_path = Path(args.xstar)
        if not xstar_path.exists():
            logger.error(f"x* file not found: {args.xstar}")
            sys.exit(1)
        if xstar_path.suffix.lower() != '.csv':
            logger.error(f"x* file must be a CSV file: {args.xstar}")
            sys.exit(1)

    for name in ('tol', 'delta', 'l0', 'm0'):
        value = getattr(args, name)
        if value is not None and not value > 0:
            logger.error(f"--{name.replace('_', '-')} must be positive, got {value}")
            sys.exit(1)

    if args.angle_spread is not None and not 0 < args.angle_spread <= math.pi:
        logger.error(f"--angle-spread must lie in (0, pi], got {args.angle_spread}")
        sys.exit(1)

    if args.max_iters is not None and args.max_iters < 0:
        logger.error(f"--max-iters must be nonnegative, got {args.max_iters}")
        sys.exit(1)

    if args.workers is not None and args.workers < 1:
        logger.error(f"--workers must be at least 1, got {args.workers}")
        sys.exit(1)


def failed_runs(reports: Sequence[SummaryReport]) -> List[str]:
    """
    Name the runs in which a solver stopped on a subproblem failure.

    Args:
        reports: Experiment summaries

    Returns:
        Labels such as case14_seed3/mpgn, empty when every run finished normally
    """
    return [f"{report.case}_seed{report.seed}/{name}"
            for report in reports
            for name, summary in report.solvers.items()
            if summary.status == SolveStatus.SUBPROBLEM_FAILURE.value]


def main() -> None:
    """
    Main application entry point.
    """
    # Parse arguments
    args = parse_arguments()

    # Set up logging
    setup_logging(args.config)
    logger = logging.getLogger(__name__)

    # Override log level if verbose
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
        logger.debug("Verbose logging enabled")

    logger.info("Starting Power-Flow Gauss-Newton Bench")

    try:
        validate_inputs(args)

        settings = load_settings(args.config)
        base = ExperimentConfig.from_settings(
            settings,
            merit_tol=args.tol,
            max_outer=args.max_iters,
            delta=args.delta,
            l0=args.l0,
            m0=args.m0,
            case=args.case,
            solver=args.solver,
            seed=args.seed,
            xstar=args.xstar,
            start=args.start,
            output_dir=args.out,
            angle_spread=args.angle_spread,
        )
        logger.info(f"Case: {base.case}, solvers: {', '.join(base.solvers)}")

        runner = ExperimentRunner(args.config)

        if args.seeds:
            seeds = parse_seeds(args.seeds)
            workers = args.workers or settings.getint('EXPERIMENT', 'workers', fallback=1)
            logger.info(f"Running {len(seeds)} seeds with {workers} worker(s)")
            reports = runner.run_batch(seed_sweep(base, seeds), workers=workers)

            for report in reports:
                print(to_record(report))
            summary = aggregate(reports)
            logger.info(f"Converged runs: {summary['converged']} of {summary['runs']}")
            if 'both_converged' in summary:
                logger.info(f"MPG-N needed fewer iterations in {summary['mpgn_fewer_iterations']} "
                            f"of {summary['both_converged']} seeds where both converged")
            if 'mpgn_faster' in summary:
                logger.info(f"MPG-N reached the tolerance first in {summary['mpgn_faster']} "
                            f"of {summary['runs']} seeds")
        else:
            reports = runner.run_batch([base], workers=1)
            print(to_text(reports[0]))
            print(to_record(reports[0]))

        logger.info(f"Results written to {base.output_dir}")

        failures = failed_runs(reports)
        if failures:
            logger.error(f"Subproblem failure in {len(failures)} run(s): {', '.join(failures)}")
            sys.exit(1)

    except KeyboardInterrupt:
        logger.info("Application interrupted by user")
        sys.exit(0)
    except Exception as e:
        logger.error(f"Unexpected error: {e}")
        if args.verbose:
            logger.exception("Full error details:")
        sys.exit(1)


if __name__ == "__main__":
    main()
