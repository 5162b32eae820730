#!/usr/bin/env python3
"""
main.py - IRS self-sensing toolkit
Subcommands: run, crb, powers, validate, spectrum
"""

import argparse
import csv
import math
import os
import sys
import traceback

import numpy as np

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from analysis import consistency, crb, power_lemmas  # noqa: E402
from core import config_manager, constants  # noqa: E402
from core.config import runtime_config  # noqa: E402
from core.config_manager import ConfigError  # noqa: E402
from estimation import music  # noqa: E402
from harness import experiment, results  # noqa: E402
from harness.schemes import SchemeId, build_scheme_channel  # noqa: E402
from model import reflection  # noqa: E402
from ui import display  # noqa: E402
from utils import logger  # noqa: E402
from verification import oracle_suite  # noqa: E402

VERSION = "1.0.0"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2


def cmd_run(args):
    plan = experiment.ExperimentPlan.from_file(args.plan, trials=args.trials, seed=args.seed)
    display.print_header("MONTE CARLO EXPERIMENT")
    display.print_info(f"Schemes: {', '.join(s.value for s in plan.schemes)}")
    display.print_info(f"Sweep: {plan.sweep_param} = {list(plan.sweep_values)}, {plan.trials} trial(s) each")

    result = experiment.run_experiment(plan, workers=args.workers, show_progress=not args.quiet)
    path = results.emit_results(result, args.out or plan.outputs.get("csv", "results.csv"))

    display.print_table(
        ["scheme", plan.sweep_param, "RMSE (deg)", "P_success", "Rx power (dBm)", "CRB (deg^2)", "failed"],
        [[row.scheme, display.format_value(row.sweep_value), display.format_value(row.rmse_deg),
          display.format_value(row.p_success, 4), display.format_value(row.mean_rx_power_dbm, 5),
          display.format_value(row.crb_deg2), row.failed] for row in result.rows])
    display.print_success(f"Results written to {path}")
    return EXIT_OK


def cmd_crb(args):
    cfg = config_manager.load_scenario(args.scenario)
    schedule = reflection.dft_schedule(cfg.layout.n_h, cfg.snapshots)
    report = crb.crb_report(cfg, schedule)

    display.print_header("CRAMER-RAO BOUND")
    display.print_table(
        ["theta (deg)", "closed form", "FIM pipeline", "finite differences"],
        [[display.format_value(math.degrees(cfg.theta)), display.format_value(report.crb_closed),
          display.format_value(report.crb_pipeline), display.format_value(report.crb_fd)]])
    display.print_info(f"xi = {report.xi:.6g}, p(theta) = {report.p_theta:.6g}, "
                       f"w1 = {report.w1:.6g}, w2 = {report.w2:.6g}")

    agreement = consistency.crb_consistency_report(cfg, schedule)
    path = args.out or "crb_report.csv"
    consistency.report_to_csv(agreement, path)
    display.print_info(f"Closed form / pipeline over {agreement.theta.size} angles: "
                       f"{agreement.classification}, mean {agreement.mean_ratio:.6g}, "
                       f"max deviation {agreement.max_deviation:.2%}")
    display.print_success(f"CRB report written to {path}")
    return EXIT_OK


def _sweep_grid(cfg, points):
    d_it = cfg.d_it
    grid = np.linspace(d_it / points, d_it * (1.0 - 1.0 / points), points)
    minimizer = power_lemmas.combined_power_minimizer_root(cfg)
    return np.sort(np.append(grid, minimizer)), minimizer


def cmd_powers(args):
    cfg = config_manager.load_scenario(args.scenario)
    p_r, p_d = power_lemmas.echo_link_powers(cfg)
    grid, minimizer = _sweep_grid(cfg, args.points)
    equal = power_lemmas.equal_power_distance(cfg)

    display.print_header("ECHO POWERS")
    display.print_table(
        ["quantity", "value"],
        [["P_r (dBm)", display.format_value(constants.watts_to_dbm(p_r))],
         ["P_d (dBm)", display.format_value(constants.watts_to_dbm(p_d))],
         ["N_th", display.format_value(power_lemmas.element_threshold(cfg))],
         ["argmin P_c (m)", display.format_value(minimizer)],
         ["P_r = P_d at d_UI (m)", display.format_value(equal)]])

    path = args.out or "powers.csv"
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["d_ui_m", "d_ut_m", "p_r_dbm", "p_d_dbm", "p_c_dbm", "dp_c"])
            for row in power_lemmas.power_sweep(cfg, grid):
                writer.writerow([repr(row["d_ui_m"]), repr(row["d_ut_m"]),
                                 repr(constants.watts_to_dbm(row["p_r"])),
                                 repr(constants.watts_to_dbm(row["p_d"])),
                                 repr(constants.watts_to_dbm(row["p_c"])), repr(row["dp_c"])])
    except OSError as e:
        raise OSError(f"Cannot write power sweep to {path}: {e}") from e
    display.print_success(f"Power sweep written to {path}")
    return EXIT_OK


def cmd_validate(args):
    display.print_header("SELF-CHECKS")
    checks = oracle_suite.run_all()
    for check in checks:
        if check.ok:
            display.print_success(f"{check.name}: {check.detail}")
        else:
            display.print_error(f"{check.name}: {check.detail}")
    failed = [c for c in checks if not c.ok]
    if failed:
        display.print_error(f"{len(failed)} of {len(checks)} checks failed")
        return EXIT_VALIDATION
    display.print_success(f"All {len(checks)} checks passed")
    return EXIT_OK


def cmd_spectrum(args):
    cfg = config_manager.load_scenario(args.scenario)
    scheme = build_scheme_channel(SchemeId.PROPOSED, cfg)
    rng = np.random.default_rng(args.seed)
    snapshots = scheme.synthesize(rng, True)
    estimate = music.estimate_doa(snapshots, cfg.layout, step=cfg.grid_step, refine=cfg.refine_peak)

    path = args.out or "spectrum.csv"
    music.spectrum_to_csv(estimate, path)
    display.print_info(f"theta = {math.degrees(cfg.theta):.4f} deg, "
                       f"estimate = {math.degrees(estimate.theta_hat):.4f} deg")
    if estimate.degenerate:
        display.print_warning("Signal and noise eigenvalues are tied")
    display.print_success(f"Spectrum written to {path}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(description=f"IRS self-sensing toolkit v{VERSION}")
    parser.add_argument("--debug", action="store_true", help="Enable verbose logging")
    parser.add_argument("--workers", type=int, help="Worker processes (overrides IRS_SENSING_WORKERS)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Execute an experiment plan")
    run.add_argument("plan", help="Plan file (TOML)")
    run.add_argument("--out", help="Result CSV (default: [outputs] csv)")
    run.add_argument("--trials", type=int, help="Override plan.trials")
    run.add_argument("--seed", type=int, help="Override plan.seed")
    run.add_argument("--quiet", action="store_true", help="No progress bar")
    run.set_defaults(handler=cmd_run)

    crb_cmd = sub.add_parser("crb", help="CRB agreement report for a scenario")
    crb_cmd.add_argument("scenario", help="Scenario file (TOML)")
    crb_cmd.add_argument("--out", help="Report CSV (default: crb_report.csv)")
    crb_cmd.set_defaults(handler=cmd_crb)

    powers = sub.add_parser("powers", help="Echo powers and the user-distance sweep")
    powers.add_argument("scenario", help="Scenario file (TOML)")
    powers.add_argument("--out", help="Sweep CSV (default: powers.csv)")
    powers.add_argument("--points", type=int, default=200, help="Sweep points over (0, d_IT)")
    powers.set_defaults(handler=cmd_powers)

    validate = sub.add_parser("validate", help="Run the analytic and numerical self-checks")
    validate.set_defaults(handler=cmd_validate)

    spectrum = sub.add_parser("spectrum", help="MUSIC spectrum of one noisy trial")
    spectrum.add_argument("scenario", help="Scenario file (TOML)")
    spectrum.add_argument("--out", help="Spectrum CSV (default: spectrum.csv)")
    spectrum.add_argument("--seed", type=int, default=0, help="Trial seed")
    spectrum.set_defaults(handler=cmd_spectrum)
    return parser


def main(argv=None):
    """Parse arguments and dispatch; returns the exit code."""
    args = build_parser().parse_args(argv)
    runtime_config.debug = args.debug
    runtime_config.workers = args.workers
    logger.setup_logging(verbose=args.debug)
    logger.log_info(f"Command: {args.command}")

    try:
        return args.handler(args)
    except ConfigError as e:
        key = f" [{e.key}]" if e.key else ""
        display.print_error(f"Configuration error{key}: {e}")
        logger.log_error(f"Configuration error{key}: {e}")
        return EXIT_CONFIG


def cli(argv=None):
    """main() plus the last-resort handlers; returns the exit code."""
    try:
        return main(argv)
    except KeyboardInterrupt:
        print("\n\nOperation cancelled by user.")
        return EXIT_OK
    except Exception as e:
        display.print_error(f"Fatal error: {e}")
        logger.log_error(traceback.format_exc())
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(cli())
