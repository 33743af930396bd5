"""Energy-latency trade-off of compressing sensor data before wireless transmission."""

from elo_tradeoff.comm_model import (
    ChannelParams,
    TxTimeStats,
    avg_snr,
    comm_energy,
    energy_efficiency,
    exact_tx_quantile,
    num_packets,
    outage_rate,
    packet_time,
    snr_threshold,
    tx_time_stats,
)
from elo_tradeoff.comp_model import (
    CompressionParams,
    GammaDist,
    compression_energy,
    compression_time_dist,
    cpu_power,
    mean_complexity,
)
from elo_tradeoff.config_loaders import (
    RunConfig,
    emit_config,
    load_config,
    load_config_from_header,
    load_front_csv,
    parse_config,
)
from elo_tradeoff.errors import (
    ConfigError,
    ConvergenceError,
    DegenerateQ,
    DomainError,
    EloError,
    Infeasible,
)
from elo_tradeoff.front_savers import (
    save_curve,
    save_front,
    save_front_csv,
    save_front_dat,
    save_validation_report,
)
from elo_tradeoff.fronts import ParetoFront, pareto_filter
from elo_tradeoff.montecarlo import (
    SimConfig,
    gaussian_approx_error,
    sample_latency,
    simulate_slot,
)
from elo_tradeoff.power_scenario import PowerProblem, PowerSolution
from elo_tradeoff.system_params import SystemParams, SystemParamsFactory
from elo_tradeoff.time_scenario import TimeProblem, TimeSolution
from elo_tradeoff.validation import CheckResult, exhaustive_time_optimum, run_validation

__all__ = [
    # Parameters
    "CompressionParams",
    "ChannelParams",
    "SystemParams",
    "SystemParamsFactory",
    # Computation model
    "GammaDist",
    "mean_complexity",
    "compression_time_dist",
    "cpu_power",
    "compression_energy",
    # Channel model
    "TxTimeStats",
    "avg_snr",
    "snr_threshold",
    "outage_rate",
    "packet_time",
    "energy_efficiency",
    "num_packets",
    "tx_time_stats",
    "exact_tx_quantile",
    "comm_energy",
    # Scenarios
    "PowerProblem",
    "PowerSolution",
    "TimeProblem",
    "TimeSolution",
    "ParetoFront",
    "pareto_filter",
    # Monte Carlo
    "SimConfig",
    "sample_latency",
    "simulate_slot",
    "gaussian_approx_error",
    # Configuration and output
    "RunConfig",
    "parse_config",
    "emit_config",
    "load_config",
    "load_config_from_header",
    "load_front_csv",
    "save_curve",
    "save_front",
    "save_front_csv",
    "save_front_dat",
    "save_validation_report",
    # Validation
    "CheckResult",
    "exhaustive_time_optimum",
    "run_validation",
    # Errors
    "EloError",
    "DomainError",
    "DegenerateQ",
    "Infeasible",
    "ConvergenceError",
    "ConfigError",
]
