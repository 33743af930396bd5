"""
Run configuration: parsing, echoing and re-loading.

Configurations are flat `key = value` documents with `#` comments. Every
model symbol has exactly one key and the unit is part of the key name; keys
ending in `_db` / `_dbm_per_hz` are converted to linear SI values once, at
parse time. Missing keys take the values of SystemParamsFactory.create_default().

Output files echo the configuration in their header, so a run can be
repeated from any file it produced (load_config_from_header).
"""

import io
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Tuple, Union

import pandas as pd

from elo_tradeoff.comm_model import ChannelParams
from elo_tradeoff.comp_model import CompressionParams
from elo_tradeoff.errors import ConfigError, DomainError
from elo_tradeoff.montecarlo import SimConfig
from elo_tradeoff.power_scenario import PowerProblem
from elo_tradeoff.system_params import SystemParams, SystemParamsFactory
from elo_tradeoff.time_scenario import TimeProblem
from elo_tradeoff.unit_converters import db_to_linear, dbm_to_watt

SCENARIOS = ("power", "time", "validate")
FORMATS = ("csv", "dat")
SEED_ENV_VAR = "ELO_SEED"
CONFIG_BEGIN = "# --- config ---"
SECTION_PREFIX = "# ---"


@dataclass(frozen=True)
class RunConfig:
    """Fully materialized configuration of one CLI run."""

    scenario: str = "validate"
    params: SystemParams = field(default_factory=SystemParamsFactory.create_default)
    emax_list: Tuple[float, ...] = (0.08, 0.085, 0.09, 0.095, 0.1, 0.11, 0.12)
    t_list: Tuple[float, ...] = (0.4, 0.45, 0.5)
    rho_list: Tuple[float, ...] = (0.9, 0.99, 0.999)
    theta_power: float = 1e-3
    theta_time: float = 0.01
    fc_tol: float = 1e6
    sim: SimConfig = field(default_factory=SimConfig)
    output_dir: str = "output"
    format: str = "csv"
    include_decompression: bool = True
    literal_truncation: bool = False
    skip_tx_on_comp_failure: bool = False
    max_workers: int = 1

    @property
    def sweep(self) -> Tuple[float, ...]:
        """Constraint values of the configured scenario (E_max list or T list)."""
        return self.t_list if self.scenario == "time" else self.emax_list

    def power_problem(self, E_max: Optional[float] = None, rho: Optional[float] = None) -> PowerProblem:
        """Power-scenario problem for one budget; defaults to the first sweep and rho values."""
        return PowerProblem(
            comp=self.params.comp,
            chan=self.params.chan,
            E_max=self.emax_list[0] if E_max is None else E_max,
            rho=self.rho_list[0] if rho is None else rho,
            theta=self.theta_power,
            include_decompression=self.include_decompression,
        )

    def time_problem(
        self,
        T: Optional[float] = None,
        rho: Optional[float] = None,
        theta: Optional[float] = None,
    ) -> TimeProblem:
        """Time-scenario problem for one slot budget; defaults to the first sweep and rho values."""
        return TimeProblem(
            comp=self.params.comp,
            chan=self.params.chan,
            T=self.t_list[0] if T is None else T,
            rho=self.rho_list[0] if rho is None else rho,
            theta=self.theta_time if theta is None else theta,
            fc_tol=self.fc_tol,
            literal_truncation=self.literal_truncation,
        )


# key -> value kind
_KINDS: Dict[str, str] = {
    "scenario": "str",
    "data_bits": "float",
    "kappa": "float",
    "psi": "float",
    "zeta": "float",
    "fc_min_hz": "float",
    "fc_max_hz": "float",
    "ps_max_w": "float",
    "fb_hz": "float",
    "q_max": "float",
    "ptx_w": "float",
    "bandwidth_hz": "float",
    "distance_m": "float",
    "pathloss_exp": "float",
    "n0_w_per_hz": "float",
    "n0_dbm_per_hz": "float",
    "k0": "float",
    "k0_db": "float",
    "nu_j": "float",
    "lambda_j_per_bit": "float",
    "eps": "float",
    "packet_bits": "int",
    "emax_list": "float_list",
    "t_list": "float_list",
    "rho_list": "float_list",
    "theta_power": "float",
    "theta_time": "float",
    "fc_tol_hz": "float",
    "n_samples": "int",
    "seed": "int",
    "antithetic": "bool",
    "output_dir": "str",
    "format": "str",
    "include_decompression": "bool",
    "literal_truncation": "bool",
    "skip_tx_on_comp_failure": "bool",
    "max_workers": "int",
}

# logarithmic keys and their linear counterparts
_CONVERSIONS: Dict[str, Tuple[str, Callable[[float], float]]] = {
    "n0_dbm_per_hz": ("n0_w_per_hz", dbm_to_watt),
    "k0_db": ("k0", db_to_linear),
}

_POSITIVE = (
    "data_bits", "kappa", "psi", "fc_min_hz", "fc_max_hz", "ps_max_w", "fb_hz", "ptx_w",
    "bandwidth_hz", "distance_m", "pathloss_exp", "n0_w_per_hz", "k0", "nu_j",
    "lambda_j_per_bit", "theta_power", "theta_time", "fc_tol_hz",
)

_TRUE = ("true", "yes", "on", "1")
_FALSE = ("false", "no", "off", "0")


def _parse_value(kind: str, text: str):
    if kind == "str":
        return text
    if kind == "float":
        return float(text)
    if kind == "int":
        try:
            return int(text)
        except ValueError:
            value = float(text)
        if not value.is_integer():
            raise ValueError(f"expected an integer, got {text!r}")
        return int(value)
    if kind == "bool":
        lowered = text.lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise ValueError(f"expected true/false, got {text!r}")
    if kind == "float_list":
        items = [item.strip() for item in text.split(",") if item.strip()]
        if not items:
            raise ValueError("expected a comma-separated list of numbers")
        return tuple(float(item) for item in items)
    raise ValueError(f"unknown value kind {kind}")


def _check_domain(values: Mapping[str, object], lines: Mapping[str, int]) -> None:
    """Key-level bounds, then the frequency ordering across fc_min_hz and fc_max_hz."""

    def fail(key: str, bound: str) -> None:
        raise ConfigError(
            f"{key} must satisfy {bound}, got {values[key]!r}", line=lines.get(key), key=key
        )

    for key in _POSITIVE:
        if key in values and not (values[key] > 0.0 and math.isfinite(values[key])):
            fail(key, f"{key} > 0")
    if "eps" in values and not 0.0 < values["eps"] < 1.0:
        fail("eps", "eps ∈ (0,1)")
    if "zeta" in values and not 0.0 < values["zeta"] <= 1.0:
        fail("zeta", "zeta ∈ (0,1]")
    if "q_max" in values and not values["q_max"] > 1.0:
        fail("q_max", "q_max > 1")
    if "packet_bits" in values and values["packet_bits"] < 1:
        fail("packet_bits", "packet_bits >= 1")
    if "n_samples" in values and values["n_samples"] < 1:
        fail("n_samples", "n_samples >= 1")
    if "seed" in values and not 0 <= values["seed"] < 2**64:
        fail("seed", "0 <= seed < 2^64")
    if "max_workers" in values and values["max_workers"] < 1:
        fail("max_workers", "max_workers >= 1")
    if "rho_list" in values and not all(0.0 < r < 1.0 for r in values["rho_list"]):
        fail("rho_list", "every rho ∈ (0,1)")
    for key in ("emax_list", "t_list"):
        if key in values and not all(v > 0.0 for v in values[key]):
            fail(key, f"every {key} entry > 0")
    if "scenario" in values and values["scenario"] not in SCENARIOS:
        fail("scenario", f"scenario ∈ {set(SCENARIOS)}")
    if "format" in values and values["format"] not in FORMATS:
        fail("format", f"format ∈ {set(FORMATS)}")

    comp = RunConfig().params.comp
    fc_min = values.get("fc_min_hz", comp.fc_min)
    fc_max = values.get("fc_max_hz", comp.fc_max)
    if not fc_min < fc_max:
        given = [key for key in ("fc_min_hz", "fc_max_hz") if key in values]
        key = max(given, key=lambda k: lines.get(k, 0))
        raise ConfigError(
            f"fc_min_hz, fc_max_hz must satisfy fc_min_hz < fc_max_hz, "
            f"got fc_min_hz={fc_min!r}, fc_max_hz={fc_max!r}",
            line=lines.get(key),
            key=key,
        )


def _build(values: Mapping[str, object]) -> RunConfig:
    default = RunConfig()
    comp, chan, sim = default.params.comp, default.params.chan, default.sim
    try:
        comp = CompressionParams(
            D=values.get("data_bits", comp.D),
            kappa=values.get("kappa", comp.kappa),
            psi=values.get("psi", comp.psi),
            zeta=values.get("zeta", comp.zeta),
            fc_min=values.get("fc_min_hz", comp.fc_min),
            fc_max=values.get("fc_max_hz", comp.fc_max),
            Ps_max=values.get("ps_max_w", comp.Ps_max),
            f_b=values.get("fb_hz", comp.f_b),
            Q_max=values.get("q_max", comp.Q_max),
        )
        chan = ChannelParams(
            P_tx=values.get("ptx_w", chan.P_tx),
            B=values.get("bandwidth_hz", chan.B),
            d=values.get("distance_m", chan.d),
            ell=values.get("pathloss_exp", chan.ell),
            N0=values.get("n0_w_per_hz", chan.N0),
            K0=values.get("k0", chan.K0),
            nu=values.get("nu_j", chan.nu),
            lambda_coef=values.get("lambda_j_per_bit", chan.lambda_coef),
            eps=values.get("eps", chan.eps),
            n_p=values.get("packet_bits", chan.n_p),
        )
        sim = SimConfig(
            n_samples=values.get("n_samples", sim.n_samples),
            seed=values.get("seed", sim.seed),
            antithetic=values.get("antithetic", sim.antithetic),
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

    return RunConfig(
        scenario=values.get("scenario", default.scenario),
        params=SystemParams(comp=comp, chan=chan),
        emax_list=values.get("emax_list", default.emax_list),
        t_list=values.get("t_list", default.t_list),
        rho_list=values.get("rho_list", default.rho_list),
        theta_power=values.get("theta_power", default.theta_power),
        theta_time=values.get("theta_time", default.theta_time),
        fc_tol=values.get("fc_tol_hz", default.fc_tol),
        sim=sim,
        output_dir=values.get("output_dir", default.output_dir),
        format=values.get("format", default.format),
        include_decompression=values.get("include_decompression", default.include_decompression),
        literal_truncation=values.get("literal_truncation", default.literal_truncation),
        skip_tx_on_comp_failure=values.get("skip_tx_on_comp_failure", default.skip_tx_on_comp_failure),
        max_workers=values.get("max_workers", default.max_workers),
    )


def parse_config(text: str) -> RunConfig:
    """
    Parse a flat key-value configuration document.

    Args:
        text: Document with `key = value` lines; `#` starts a comment

    Returns:
        RunConfig with every missing key at its default

    Raises:
        ConfigError: On syntax errors, unknown or repeated keys, and domain
            violations (the message names the key and its bound)

    Example:
        >>> parse_config("n0_dbm_per_hz = -110").params.chan.N0
        1e-14
    """
    values: Dict[str, object] = {}
    lines: Dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value_text = line.partition("=")
        key, value_text = key.strip(), value_text.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        if key not in _KINDS:
            raise ConfigError(f"unknown key {key!r}", line=lineno, key=key)
        try:
            value = _parse_value(_KINDS[key], value_text)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", line=lineno, key=key) from exc
        if key in _CONVERSIONS:
            key, convert = _CONVERSIONS[key][0], _CONVERSIONS[key][1]
            value = convert(value)
        if key in values:
            raise ConfigError(f"{key} given more than once", line=lineno, key=key)
        values[key] = value
        lines[key] = lineno

    _check_domain(values, lines)
    return _build(values)


def _format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_items(cfg: RunConfig) -> List[Tuple[str, object]]:
    """(key, value) pairs of a configuration in canonical order, linear units."""
    comp, chan, sim = cfg.params.comp, cfg.params.chan, cfg.sim
    return [
        ("scenario", cfg.scenario),
        ("data_bits", comp.D),
        ("kappa", comp.kappa),
        ("psi", comp.psi),
        ("zeta", comp.zeta),
        ("fc_min_hz", comp.fc_min),
        ("fc_max_hz", comp.fc_max),
        ("ps_max_w", comp.Ps_max),
        ("fb_hz", comp.f_b),
        ("q_max", comp.Q_max),
        ("ptx_w", chan.P_tx),
        ("bandwidth_hz", chan.B),
        ("distance_m", chan.d),
        ("pathloss_exp", chan.ell),
        ("n0_w_per_hz", chan.N0),
        ("k0", chan.K0),
        ("nu_j", chan.nu),
        ("lambda_j_per_bit", chan.lambda_coef),
        ("eps", chan.eps),
        ("packet_bits", chan.n_p),
        ("emax_list", cfg.emax_list),
        ("t_list", cfg.t_list),
        ("rho_list", cfg.rho_list),
        ("theta_power", cfg.theta_power),
        ("theta_time", cfg.theta_time),
        ("fc_tol_hz", cfg.fc_tol),
        ("n_samples", sim.n_samples),
        ("seed", sim.seed),
        ("antithetic", sim.antithetic),
        ("output_dir", cfg.output_dir),
        ("format", cfg.format),
        ("include_decompression", cfg.include_decompression),
        ("literal_truncation", cfg.literal_truncation),
        ("skip_tx_on_comp_failure", cfg.skip_tx_on_comp_failure),
        ("max_workers", cfg.max_workers),
    ]


def emit_config(cfg: RunConfig) -> str:
    """
    Serialize a configuration so that parse_config(emit_config(cfg)) == cfg.

    Floats are written with repr (shortest round-tripping form) and the
    noise density and Friis parameter in their linear keys.
    """
    return "".join(f"{key} = {_format_value(value)}\n" for key, value in config_items(cfg))


def override_config(cfg: RunConfig, overrides: Mapping[str, object]) -> RunConfig:
    """
    Replace configuration keys and re-validate the result.

    Args:
        cfg: Base configuration
        overrides: New values keyed by configuration key (linear units)

    Raises:
        ConfigError: On unknown keys or values outside their domain
    """
    items = dict(config_items(cfg))
    for key, value in overrides.items():
        if key not in items:
            raise ConfigError(f"unknown key {key!r}", key=key)
        items[key] = value
    return parse_config("".join(f"{key} = {_format_value(value)}\n" for key, value in items.items()))


def load_config(file_path: Union[str, Path]) -> RunConfig:
    """Parse a configuration file."""
    with open(file_path, "r") as f:
        return parse_config(f.read())


def apply_env_overrides(cfg: RunConfig, environ: Optional[Mapping[str, str]] = None) -> RunConfig:
    """Apply the ELO_SEED environment override to the seed."""
    environ = os.environ if environ is None else environ
    raw = environ.get(SEED_ENV_VAR)
    if raw is None or not raw.strip():
        return cfg
    try:
        seed = int(raw)
        sim = replace(cfg.sim, seed=seed)
    except (ValueError, DomainError) as exc:
        raise ConfigError(f"{SEED_ENV_VAR} must be a 64-bit unsigned integer, got {raw!r}", key="seed") from exc
    return replace(cfg, sim=sim)


def _header_lines(file_path: Union[str, Path]) -> List[str]:
    header = []
    with open(file_path, "r") as f:
        for line in f:
            if not line.startswith("#"):
                break
            header.append(line.rstrip("\n"))
    return header


def read_header_metadata(file_path: Union[str, Path]) -> Dict[str, str]:
    """Metadata `# key = value` lines of an output file that precede the config block."""
    metadata: Dict[str, str] = {}
    for line in _header_lines(file_path):
        if line.startswith(SECTION_PREFIX):
            break
        key, sep, value = line[1:].partition("=")
        if sep:
            metadata[key.strip()] = value.strip()
    return metadata


def load_config_from_header(file_path: Union[str, Path]) -> RunConfig:
    """
    Recover the configuration echoed into the header of an output file.

    Raises:
        ConfigError: If the file has no configuration block
    """
    header = _header_lines(file_path)
    try:
        start = header.index(CONFIG_BEGIN) + 1
    except ValueError:
        raise ConfigError(f"{file_path} has no configuration header") from None
    body = []
    for line in header[start:]:
        if line.startswith(SECTION_PREFIX):
            break
        body.append(line[1:].strip())
    return parse_config("\n".join(body))


def load_front_csv(file_path: Union[str, Path]) -> Tuple[RunConfig, pd.DataFrame]:
    """
    Load a Pareto-front CSV written by save_front_csv.

    Returns:
        (configuration from the header, front rows as a DataFrame)
    """
    cfg = load_config_from_header(file_path)
    with open(file_path, "r") as f:
        body = "".join(line for line in f if not line.startswith("#"))
    frame = pd.read_csv(
        io.StringIO(body), keep_default_na=False, na_values=["nan"], float_precision="round_trip"
    )
    return cfg, frame
