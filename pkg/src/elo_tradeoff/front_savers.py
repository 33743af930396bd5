"""
Writers for Pareto fronts, sweep curves and validation reports.

Every file starts with a header block of `# key = value` lines: a title,
the run id, file-specific metadata, the complete configuration echo
(between `# --- config ---` and `# --- derived ---`) and the derived link
quantities. CSV bodies use full double precision.
"""

import hashlib
from pathlib import Path
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

from elo_tradeoff.comm_model import avg_snr, energy_efficiency, outage_rate, packet_time
from elo_tradeoff.config_loaders import CONFIG_BEGIN, RunConfig, emit_config
from elo_tradeoff.fronts import ParetoFront
from elo_tradeoff.unit_converters import linear_to_db, watt_to_dbm
from elo_tradeoff.validation import CheckResult

FLOAT_FORMAT = "%.17g"
DERIVED_BEGIN = "# --- derived ---"


def run_id(cfg: RunConfig) -> str:
    """Short content hash of the configuration echo."""
    return hashlib.sha1(emit_config(cfg).encode("utf-8")).hexdigest()[:12]


def build_header(cfg: RunConfig, title: str, metadata: Optional[Mapping[str, object]] = None) -> List[str]:
    """
    Header lines (without newlines) for an output file.

    Args:
        cfg: Configuration of the run
        title: First header line
        metadata: Extra file-specific `key = value` entries

    Returns:
        List of lines starting with '#'
    """
    chan = cfg.params.chan
    lines = [f"# {title}", f"# run_id = {run_id(cfg)}"]
    for key, value in (metadata or {}).items():
        lines.append(f"# {key} = {value!r}" if isinstance(value, float) else f"# {key} = {value}")
    lines.append(CONFIG_BEGIN)
    lines.extend(f"# {line}" for line in emit_config(cfg).splitlines())
    lines.append(DERIVED_BEGIN)
    lines.extend(
        [
            f"# n0_dbm_per_hz = {watt_to_dbm(chan.N0)!r}",
            f"# k0_db = {linear_to_db(chan.K0)!r}",
            f"# gamma0 = {avg_snr(chan)!r}",
            f"# outage_rate_bps = {outage_rate(chan)!r}",
            f"# packet_time_s = {packet_time(chan)!r}",
            f"# energy_efficiency_bit_per_j = {energy_efficiency(chan)!r}",
        ]
    )
    return lines


def front_file_name(front: ParetoFront, fmt: str) -> str:
    """e.g. power_front_rho0.9.csv"""
    return f"{front.scenario}_front_rho{front.rho!r}.{fmt}"


def _write_header(f, header: Iterable[str]) -> None:
    for line in header:
        f.write(line + "\n")


def save_dataframe_csv(frame: pd.DataFrame, file_path: Union[str, Path], header: Sequence[str]) -> None:
    """Write a header block followed by a CSV table at full precision."""
    with open(file_path, "w", newline="") as f:
        _write_header(f, header)
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")


def save_front_csv(front: ParetoFront, file_path: Union[str, Path], cfg: RunConfig) -> None:
    """
    Save a Pareto front to CSV.

    Example:
        >>> save_front_csv(front, "output/power_front_rho0.9.csv", cfg)
    """
    header = build_header(
        cfg,
        f"elo-tradeoff {front.scenario} front",
        {"front_rho": front.rho, "constraint": front.constraint, "objective": front.objective},
    )
    save_dataframe_csv(front.to_dataframe(), file_path, header)


def save_xy_dat(
    points: Iterable[Tuple[float, float]],
    file_path: Union[str, Path],
    header: Sequence[str],
    columns: Tuple[str, str],
) -> None:
    """Write space-separated two-column `x y` data for plotting tools."""
    with open(file_path, "w", newline="") as f:
        _write_header(f, header)
        f.write(f"# columns = {columns[0]} {columns[1]}\n")
        for x, y in points:
            f.write(f"{x:.17g} {y:.17g}\n")


def save_front_dat(front: ParetoFront, file_path: Union[str, Path], cfg: RunConfig) -> None:
    """Save the feasible (constraint, objective) pairs of a front as a two-column file."""
    header = build_header(
        cfg,
        f"elo-tradeoff {front.scenario} front",
        {"front_rho": front.rho, "constraint": front.constraint, "objective": front.objective},
    )
    points = [(row[front.constraint], row[front.objective]) for row in front.feasible_rows]
    save_xy_dat(points, file_path, header, (front.constraint, front.objective))


def save_front(front: ParetoFront, output_dir: Union[str, Path], cfg: RunConfig) -> Path:
    """Save a front in the configured format; returns the written path."""
    directory = Path(output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / front_file_name(front, cfg.format)
    if cfg.format == "dat":
        save_front_dat(front, path, cfg)
    else:
        save_front_csv(front, path, cfg)
    return path


def save_curve(
    frame: pd.DataFrame,
    x: str,
    ys: Sequence[str],
    output_dir: Union[str, Path],
    stem: str,
    cfg: RunConfig,
    metadata: Optional[Mapping[str, object]] = None,
) -> List[Path]:
    """
    Save a sweep curve in the configured format.

    CSV keeps every column in one `<stem>.csv`. The dat format writes one
    two-column `<stem>_<y>.dat` per requested y column, skipping rows where
    either value is NaN.

    Returns:
        Written paths
    """
    directory = Path(output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    header = build_header(cfg, f"elo-tradeoff {stem}", metadata)
    if cfg.format == "csv":
        path = directory / f"{stem}.csv"
        save_dataframe_csv(frame, path, header)
        return [path]

    paths = []
    for y in ys:
        path = directory / f"{stem}_{y}.dat"
        rows = frame[[x, y]].dropna()
        save_xy_dat(zip(rows[x], rows[y]), path, header, (x, y))
        paths.append(path)
    return paths


def save_validation_report(
    results: Sequence[CheckResult],
    file_path: Union[str, Path],
    cfg: RunConfig,
) -> None:
    """
    Write one line per validation check: name, PASS/FAIL, deviation, tolerance.

    The report carries no timings or paths, so identical configurations give
    identical files.
    """
    passed = sum(1 for r in results if r.passed)
    header = build_header(
        cfg,
        "elo-tradeoff validation report",
        {"checks": len(results), "passed": passed},
    )
    with open(file_path, "w", newline="") as f:
        _write_header(f, header)
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            f.write(f"{r.name:<34} {status:<4} deviation={r.deviation:.6g} tolerance={r.tolerance:.6g}\n")
