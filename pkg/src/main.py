"""
Main entry point for the secure interference-alignment simulator
"""

import argparse
import sys
from typing import Any, Dict, List, Optional

from loguru import logger
from pydantic import ValidationError

from .config import Config
from .exceptions import ExperimentSpecError
from .experiments.manager import run_experiment, summary_from_frame
from .models import ExperimentSpec
from .system.channels import check_properness
from .utils.csv_writer import emit_csv, load_records_csv
from .utils.plotting import emit_plot

EXIT_OK = 0
EXIT_INVALID_SPEC = 1
EXIT_RUNTIME_FAILURE = 2


def setup_logging():
    """Setup logging configuration"""
    logger.remove()  # Remove default logger

    # Console logging
    logger.add(
        sys.stdout,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>",
        level=Config.LOG_LEVEL,
    )

    # File logging
    if Config.LOG_FILE:
        logger.add(Config.LOG_FILE, rotation="10 MB", retention="7 days", level=Config.LOG_LEVEL)


def load_spec(config_path: Optional[str], overrides: Dict[str, Any]) -> ExperimentSpec:
    """
    Build the experiment spec from a file plus command-line overrides

    Raises:
        ExperimentSpecError: Unreadable file or unknown key
        ValidationError: Values violate the model constraints
    """
    values: Dict[str, Any] = Config.read_experiment_file(config_path) if config_path else {}
    values.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return ExperimentSpec.from_flat(values)
    except ValidationError:
        raise
    except (TypeError, ValueError) as e:
        raise ExperimentSpecError(f"Invalid experiment value: {e}") from e


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "trials": args.trials,
        "snr_db": args.snr,
        "algorithms": args.algs,
        "master_seed": args.seed,
        "output_dir": args.out,
        "workers": args.workers,
        "reoptimize_per_snr": True if args.reoptimize_per_snr else None,
        "record_wall_time": True if args.wall_time else None,
    }


def command_run(args: argparse.Namespace) -> int:
    try:
        spec = load_spec(args.config, _overrides(args))
    except (ExperimentSpecError, ValidationError) as e:
        logger.error(f"Invalid experiment: {e}")
        return EXIT_INVALID_SPEC

    report = check_properness(spec.system)
    logger.info(
        f"Experiment {spec.system.label}: {spec.trials} trials, SNR {spec.snr_db} dB, "
        f"proper={report.proper}"
    )

    try:
        records, summary = run_experiment(spec)
        if not records:
            logger.error("Every trial failed; no records to write")
            return EXIT_RUNTIME_FAILURE
        emit_csv(records, spec.output_dir / "records.csv")
        emit_plot(summary, spec.output_dir / "ssr.svg", title=spec.system.label)
    except KeyboardInterrupt:
        logger.info("Experiment interrupted by user; stored trials resume on the next run")
        return EXIT_RUNTIME_FAILURE
    except Exception as e:
        logger.error(f"Experiment failed: {e}")
        return EXIT_RUNTIME_FAILURE

    for row in summary.rows:
        logger.info(
            f"{row.algorithm:>12} @ {row.snr_db:5.1f} dB: SSR {row.mean_ssr:.3f} "
            f"± {row.stderr:.3f} (n={row.count})"
        )
    return EXIT_OK


def command_plot(args: argparse.Namespace) -> int:
    try:
        summary = summary_from_frame(load_records_csv(args.csv))
        overlay = summary_from_frame(load_records_csv(args.overlay)) if args.overlay else None
    except (OSError, ValueError) as e:
        logger.error(f"Cannot read records: {e}")
        return EXIT_INVALID_SPEC
    try:
        emit_plot(summary, args.output, overlay=overlay, title=args.title)
    except OSError as e:
        logger.error(f"Cannot write plot: {e}")
        return EXIT_RUNTIME_FAILURE
    return EXIT_OK


def command_check(args: argparse.Namespace) -> int:
    try:
        spec = load_spec(args.config, {})
    except (ExperimentSpecError, ValidationError) as e:
        logger.error(f"Invalid experiment: {e}")
        return EXIT_INVALID_SPEC
    report = check_properness(spec.system)
    print(f"system: {report.system}")
    print(f"  N_t - d >= N_re: {report.transmit_condition}")
    print(f"  N_r >= K*d:      {report.receive_condition}")
    print(f"  eavesdropper dimension count: {report.eavesdropper_condition}")
    print(f"  proper: {report.proper}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Secure MIMO interference alignment simulator")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Run a Monte-Carlo experiment")
    run.add_argument("--config", type=str, help="Experiment file (key = value)")
    run.add_argument("--trials", type=int, help="Number of channel realizations")
    run.add_argument("--snr", type=str, help="Comma-separated SNR grid in dB")
    run.add_argument("--algs", type=str, help="Comma-separated algorithms: nn,rnn,conventional")
    run.add_argument("--seed", type=int, help="Master seed")
    run.add_argument("--out", type=str, help="Output directory")
    run.add_argument("--workers", type=int, help="Trials run in parallel")
    run.add_argument(
        "--reoptimize-per-snr", action="store_true", help="Optimise again at every SNR point"
    )
    run.add_argument(
        "--wall-time", action="store_true", help="Record per-trial wall time in wall_ms"
    )
    run.set_defaults(handler=command_run)

    plot = subparsers.add_parser("plot", help="Plot average SSR from a records CSV")
    plot.add_argument("csv", type=str, help="Records CSV")
    plot.add_argument("output", type=str, help="Output SVG file")
    plot.add_argument("--overlay", type=str, help="Extra CSV with algorithm,snr_db,ssr columns")
    plot.add_argument("--title", type=str, help="Figure title")
    plot.set_defaults(handler=command_plot)

    check = subparsers.add_parser("check", help="Print the properness report of a system")
    check.add_argument("--config", type=str, help="Experiment file (key = value)")
    check.set_defaults(handler=command_check)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)
    setup_logging()
    return int(args.handler(args))


if __name__ == "__main__":
    sys.exit(main())
