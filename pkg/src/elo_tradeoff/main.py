"""
Command-line entry point.

Subcommands:
    power-front     latency-vs-energy Pareto fronts, one file per rho
    time-front      energy-vs-slot Pareto fronts, one file per rho
    latency-curve   optimal frequency and latency bound along Q, per budget and rho
    success-curve   success probability and energy along alpha, Q or f_c, per slot
    validate        analytic model against brute force and Monte Carlo

Settings come from the defaults, then an optional config file, then the
ELO_SEED environment variable, then command-line flags.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from elo_tradeoff import power_scenario, time_scenario
from elo_tradeoff.config_loaders import (
    FORMATS,
    RunConfig,
    apply_env_overrides,
    load_config,
    override_config,
)
from elo_tradeoff.errors import DomainError, EloError
from elo_tradeoff.front_savers import save_curve, save_front, save_validation_report
from elo_tradeoff.fronts import ParetoFront, pareto_filter
from elo_tradeoff.validation import run_validation

logger = logging.getLogger(__name__)

SCENARIO_BY_COMMAND = {
    "power-front": "power",
    "time-front": "time",
    "latency-curve": "power",
    "success-curve": "time",
    "validate": "validate",
}
REPORT_FILE = "validation_report.txt"

# fixed operating point of success curves
DEFAULT_CURVE_POINT = {"alpha": 0.2, "Q": 1.2, "fc": 1.6e9}
CURVE_COLUMNS = ("P_succ", "E_total")
LATENCY_COLUMNS = ("fc_star", "latency_bound")


def _float_list(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(item) for item in text.split(",") if item.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per run mode."""
    parser = argparse.ArgumentParser(
        prog="elo",
        description="Energy-latency tradeoff of compressing sensor data before transmission",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--output-dir", help="directory for output files")
    common.add_argument("--format", choices=FORMATS, help="output file format")
    common.add_argument("--rho", type=float, action="append", help="reliability level (repeatable)")
    common.add_argument("--workers", type=int, help="threads for concurrent sweep points")

    power = subparsers.add_parser("power-front", parents=[common], help="latency-energy Pareto fronts")
    power.add_argument("--emax", type=_float_list, help="energy budgets [J], comma separated")
    power.add_argument("--pareto-filter", action="store_true", help="keep only non-dominated feasible rows")

    time = subparsers.add_parser("time-front", parents=[common], help="energy-slot Pareto fronts")
    time.add_argument("--t", dest="t_list", type=_float_list, help="slot budgets [s], comma separated")
    time.add_argument("--pareto-filter", action="store_true", help="keep only non-dominated feasible rows")

    latency = subparsers.add_parser("latency-curve", parents=[common], help="f_c* and latency bound vs Q")
    latency.add_argument("--emax", type=_float_list, help="energy budgets [J], comma separated")
    latency.add_argument("--q-step", type=float, default=0.01, help="spacing of the Q grid")

    success = subparsers.add_parser("success-curve", parents=[common], help="success probability vs one variable")
    success.add_argument("--axis", choices=time_scenario.CURVE_AXES, required=True, help="variable to sweep")
    success.add_argument("--t", dest="t_list", type=_float_list, help="slot budgets [s], comma separated")
    success.add_argument("--alpha", type=float, default=DEFAULT_CURVE_POINT["alpha"], help="fixed compression share")
    success.add_argument("--q", type=float, default=DEFAULT_CURVE_POINT["Q"], help="fixed compression ratio")
    success.add_argument("--fc", type=float, default=DEFAULT_CURVE_POINT["fc"], help="fixed CPU frequency [Hz]")
    success.add_argument("--points", type=int, default=100, help="points along the axis")

    validate = subparsers.add_parser("validate", parents=[common], help="run the self-check suite")
    validate.add_argument("--samples", type=int, help="Monte Carlo samples per check")
    validate.add_argument("--seed", type=int, help="Monte Carlo seed")
    validate.add_argument("--antithetic", action="store_true", default=None, help="antithetic sampling")
    return parser


def config_from_args(args: argparse.Namespace, environ: Optional[Dict[str, str]] = None) -> RunConfig:
    """
    Assemble the run configuration from a config file, the environment and flags.

    Raises:
        ConfigError: If the file or any override is invalid
    """
    cfg = load_config(args.config) if args.config else RunConfig()
    cfg = apply_env_overrides(cfg, environ)

    overrides: Dict[str, object] = {"scenario": SCENARIO_BY_COMMAND[args.command]}
    flags = {
        "output_dir": args.output_dir,
        "format": args.format,
        "rho_list": tuple(args.rho) if args.rho else None,
        "max_workers": args.workers,
        "emax_list": getattr(args, "emax", None),
        "t_list": getattr(args, "t_list", None),
        "n_samples": getattr(args, "samples", None),
        "seed": getattr(args, "seed", None),
        "antithetic": getattr(args, "antithetic", None),
    }
    overrides.update((key, value) for key, value in flags.items() if value is not None)
    return override_config(cfg, overrides)


def build_fronts(cfg: RunConfig) -> List[ParetoFront]:
    """One Pareto front per configured rho for the power or time scenario."""
    fronts = []
    for rho in cfg.rho_list:
        if cfg.scenario == "power":
            prob = cfg.power_problem(rho=rho)
            front = power_scenario.pareto_front(cfg.emax_list, rho, prob, cfg.max_workers)
        else:
            prob = cfg.time_problem(rho=rho)
            front = time_scenario.pareto_front(cfg.t_list, rho, prob, cfg.max_workers)
        fronts.append(front)
    return fronts


def run(cfg: RunConfig, pareto_only: bool = False) -> int:
    """
    Execute a configured front or validation run and write its output files.

    Args:
        cfg: Complete run configuration
        pareto_only: Save fronts reduced to their non-dominated feasible rows

    Returns:
        Exit status: 0 on success, 1 if any validation check failed
    """
    output_dir = Path(cfg.output_dir)
    if cfg.scenario == "validate":
        output_dir.mkdir(parents=True, exist_ok=True)
        results = run_validation(cfg)
        path = output_dir / REPORT_FILE
        save_validation_report(results, path, cfg)
        failed = [r.name for r in results if not r.passed]
        if failed:
            logger.error("%d validation checks failed: %s", len(failed), ", ".join(failed))
            return 1
        logger.info("All %d validation checks passed; report in %s", len(results), path)
        return 0

    cfg.params.print_summary()
    for front in build_fronts(cfg):
        front.print_summary()
        if pareto_only:
            front = pareto_filter(front)
        path = save_front(front, output_dir, cfg)
        logger.info("Saved %s front for rho=%g to %s", front.scenario, front.rho, path)
    return 0


def q_values(Q_max: float, step: float) -> List[float]:
    """Q grid 1, 1 + step, ... ending exactly at Q_max."""
    if not step > 0.0:
        raise DomainError(f"q-step must be > 0, got {step!r}")
    grid = np.round(np.arange(1.0, Q_max, step), 12)
    return [float(q) for q in grid if q < Q_max] + [Q_max]


def axis_values(axis: str, prob: time_scenario.TimeProblem, points: int) -> np.ndarray:
    """Evenly spaced points over the admissible range of one decision variable."""
    if points < 2:
        raise DomainError(f"points must be >= 2, got {points!r}")
    comp = prob.comp
    if axis == "alpha":
        return np.linspace(0.0, 1.0, points, endpoint=False)
    if axis == "Q":
        return np.linspace(1.0, comp.Q_max, points)
    return np.linspace(comp.fc_min, comp.fc_max, points)


def run_latency_curves(cfg: RunConfig, q_step: float) -> List[Path]:
    """Write f_c*(Q) and the latency bound along Q for every budget and rho."""
    grid = q_values(cfg.params.comp.Q_max, q_step)
    paths: List[Path] = []
    for rho in cfg.rho_list:
        for e_max in cfg.emax_list:
            prob = cfg.power_problem(E_max=e_max, rho=rho)
            frame = power_scenario.latency_curve(prob, grid)
            stem = f"latency_curve_rho{rho!r}_emax{e_max!r}"
            metadata = {"curve_rho": rho, "curve_E_max": e_max, "feasible_points": int(frame["feasible"].sum())}
            paths.extend(save_curve(frame, "Q", LATENCY_COLUMNS, cfg.output_dir, stem, cfg, metadata))
            logger.info("Saved latency curve for E_max=%g rho=%g", e_max, rho)
    return paths


def run_success_curves(
    cfg: RunConfig, axis: str, fixed: Mapping[str, float], points: int
) -> List[Path]:
    """Write the success probability and energy along one variable for every slot budget."""
    paths: List[Path] = []
    for T in cfg.t_list:
        prob = cfg.time_problem(T=T)
        frame = time_scenario.success_curve(prob, axis, axis_values(axis, prob, points), fixed)
        stem = f"success_curve_{axis}_T{T!r}"
        metadata = {"curve_T": T, "axis": axis}
        metadata.update((f"fixed_{name}", float(value)) for name, value in fixed.items() if name != axis)
        paths.extend(save_curve(frame, axis, CURVE_COLUMNS, cfg.output_dir, stem, cfg, metadata))
        logger.info("Saved success curve along %s for T=%g", axis, T)
    return paths


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run and return the process exit status."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = config_from_args(args)
        if args.command == "latency-curve":
            run_latency_curves(cfg, args.q_step)
            return 0
        if args.command == "success-curve":
            fixed = {"alpha": args.alpha, "Q": args.q, "fc": args.fc}
            run_success_curves(cfg, args.axis, fixed, args.points)
            return 0
        return run(cfg, pareto_only=getattr(args, "pareto_filter", False))
    except (EloError, OSError) as exc:
        logger.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
