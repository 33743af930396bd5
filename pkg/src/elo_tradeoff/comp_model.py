"""
Computation-side model of the sensor.

The number of CPU cycles per bit needed to compress a block is Gamma
distributed with shape kappa and mean e^(psi*Q) - e^psi, so the compression
time at clock f_c is Gamma(kappa, (e^(psi*Q) - e^psi) * D / (kappa * f_c)).
Processing power follows a cubic law in the clock frequency.

Q = 1 (no compression) gives a point mass at zero, represented as a
GammaDist with scale 0.
"""

import math
from dataclasses import dataclass

from elo_tradeoff.errors import DomainError
from elo_tradeoff.specfun import (
    DEFAULT_TOLERANCES,
    Tolerances,
    gamma_quantile,
    reg_lower_gamma,
    reg_upper_gamma,
)


@dataclass(frozen=True)
class CompressionParams:
    """Compression and processing parameters of the sensor and the base station."""

    D: float  # data block size [bit]
    kappa: float  # Gamma shape of the cycles-per-bit distribution
    psi: float  # algorithm constant of the mean complexity
    zeta: float  # decompression cycles as a fraction of compression cycles
    fc_min: float  # lowest sensor CPU frequency [Hz]
    fc_max: float  # highest sensor CPU frequency [Hz]
    Ps_max: float  # processing power at fc_max [W]
    f_b: float  # base-station CPU frequency [Hz]
    Q_max: float  # largest achievable lossless compression ratio

    def __post_init__(self):
        _require_positive("D", self.D)
        _require_positive("kappa", self.kappa)
        _require_positive("psi", self.psi)
        if not 0.0 < self.zeta <= 1.0:
            raise DomainError(f"zeta must be in (0, 1], got {self.zeta!r}")
        _require_positive("fc_min", self.fc_min)
        if not self.fc_min < self.fc_max:
            raise DomainError(
                f"fc_min must be < fc_max, got fc_min={self.fc_min!r}, fc_max={self.fc_max!r}"
            )
        _require_positive("Ps_max", self.Ps_max)
        _require_positive("f_b", self.f_b)
        if not self.Q_max > 1.0:
            raise DomainError(f"Q_max must be > 1, got {self.Q_max!r}")

    @property
    def power_coefficient(self) -> float:
        """Ps_max / fc_max^3, the constant of the cubic power law [W/Hz^3]."""
        return self.Ps_max / self.fc_max**3


def _require_positive(name: str, value: float) -> None:
    if not (value > 0.0 and math.isfinite(value)):
        raise DomainError(f"{name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class GammaDist:
    """
    Gamma distribution with shape/scale parametrization.

    A scale of exactly 0 is the degenerate point mass at zero; every CDF and
    quantile query on it answers for a zero duration.
    """

    shape: float
    scale: float

    def __post_init__(self):
        _require_positive("shape", self.shape)
        if not (self.scale >= 0.0 and math.isfinite(self.scale)):
            raise DomainError(f"scale must be >= 0, got {self.scale!r}")

    @property
    def is_degenerate(self) -> bool:
        return self.scale == 0.0

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def variance(self) -> float:
        return self.shape * self.scale**2

    def cdf(self, t: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
        """Pr[X <= t]."""
        if t < 0.0:
            return 0.0
        if self.is_degenerate:
            return 1.0
        return reg_lower_gamma(self.shape, t / self.scale, tol)

    def sf(self, t: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
        """Pr[X > t], accurate in the upper tail."""
        if t < 0.0:
            return 1.0
        if self.is_degenerate:
            return 0.0
        return reg_upper_gamma(self.shape, t / self.scale, tol)

    def quantile(self, rho: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
        """rho-quantile; 0 for the degenerate distribution."""
        if not 0.0 < rho < 1.0:
            raise DomainError(f"quantile level must be in (0, 1), got {rho!r}")
        if self.is_degenerate:
            return 0.0
        return gamma_quantile(self.shape, self.scale, rho, tol)

    def truncated_mean(self, limit: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
        """
        Conditional mean E[X | X < limit].

        Uses E[X | X < t] = scale * kappa * P(kappa + 1, x) / P(kappa, x) with
        x = t / scale. When P(kappa, x) underflows the small-x limit
        t * kappa / (kappa + 1) is returned.

        Args:
            limit: Truncation point t > 0

        Returns:
            Conditional mean in (0, t); 0 for the degenerate distribution
        """
        if not limit > 0.0:
            raise DomainError(f"truncation limit must be > 0, got {limit!r}")
        if self.is_degenerate:
            return 0.0
        if math.isinf(limit):
            return self.mean
        x = limit / self.scale
        lower = reg_lower_gamma(self.shape, x, tol)
        if lower <= 0.0:
            return limit * self.shape / (self.shape + 1.0)
        upper = reg_lower_gamma(self.shape + 1.0, x, tol)
        return min(self.scale * self.shape * upper / lower, limit)


def _check_ratio(Q: float, p: CompressionParams) -> None:
    if not 1.0 <= Q <= p.Q_max:
        raise DomainError(f"Q must be in [1, {p.Q_max!r}], got {Q!r}")


def _check_frequency(f_c: float, p: CompressionParams, enforce_bounds: bool) -> None:
    if not (f_c > 0.0 and math.isfinite(f_c)):
        raise DomainError(f"f_c must be > 0, got {f_c!r}")
    if enforce_bounds and not p.fc_min <= f_c <= p.fc_max:
        raise DomainError(f"f_c must be in [{p.fc_min!r}, {p.fc_max!r}] Hz, got {f_c!r}")


def mean_complexity(Q: float, p: CompressionParams) -> float:
    """
    Mean CPU cycles per bit needed to compress at ratio Q.

    Args:
        Q: Compression ratio in [1, Q_max]
        p: Compression parameters

    Returns:
        e^(psi*Q) - e^psi, evaluated as e^psi * expm1(psi*(Q-1))

    Example:
        With psi = 3.5, Q = 1.2 gives e^4.2 - e^3.5 = 33.570 cycles/bit.
    """
    _check_ratio(Q, p)
    return math.exp(p.psi) * math.expm1(p.psi * (Q - 1.0))


def compression_time_dist(
    Q: float,
    f_c: float,
    p: CompressionParams,
    enforce_bounds: bool = True,
) -> GammaDist:
    """
    Distribution of the compression time T_c.

    Args:
        Q: Compression ratio in [1, Q_max]
        f_c: Sensor CPU frequency [Hz]
        p: Compression parameters
        enforce_bounds: Reject f_c outside [fc_min, fc_max]

    Returns:
        GammaDist(kappa, mean_complexity(Q) * D / (kappa * f_c)); degenerate at Q = 1
    """
    _check_frequency(f_c, p, enforce_bounds)
    complexity = mean_complexity(Q, p)
    return GammaDist(shape=p.kappa, scale=complexity * p.D / (p.kappa * f_c))


def cpu_power(f_c: float, p: CompressionParams, enforce_bounds: bool = True) -> float:
    """Processing power Ps_max * (f_c / fc_max)^3 [W]."""
    _check_frequency(f_c, p, False)
    if enforce_bounds and f_c > p.fc_max:
        raise DomainError(f"f_c must be <= fc_max={p.fc_max!r} Hz, got {f_c!r}")
    return p.Ps_max * (f_c / p.fc_max) ** 3


def compression_energy(
    f_c: float,
    Q: float,
    p: CompressionParams,
    enforce_bounds: bool = True,
) -> float:
    """
    Average compression energy Ps_max * (e^(psi*Q) - e^psi) * D * f_c^2 / fc_max^3 [J].

    Equals cpu_power(f_c) times the mean of compression_time_dist(Q, f_c).
    """
    _check_frequency(f_c, p, enforce_bounds)
    return p.power_coefficient * mean_complexity(Q, p) * p.D * f_c**2


def decompression_scale(f_c: float, p: CompressionParams) -> float:
    """Multiplier 1 + zeta * f_c / f_b applied to T_c in the end-to-end latency."""
    if not f_c > 0.0:
        raise DomainError(f"f_c must be > 0, got {f_c!r}")
    return 1.0 + p.zeta * f_c / p.f_b
