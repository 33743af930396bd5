"""
Channel-side model of the sensor-to-base-station link.

Rayleigh block fading with average SNR gamma0, transmission at the Shannon
outage rate R(eps), persistent ARQ per packet and an energy efficiency that
accounts for transmit, sampling and coding power.
"""

import math
from dataclasses import dataclass
from typing import Union

from elo_tradeoff.errors import DomainError
from elo_tradeoff.specfun import nbinom_quantile, probit

Count = Union[int, float]


@dataclass(frozen=True)
class ChannelParams:
    """Radio link parameters."""

    P_tx: float  # transmit power [W]
    B: float  # bandwidth [Hz]
    d: float  # sensor to base-station distance [m]
    ell: float  # path-loss exponent
    N0: float  # noise power spectral density [W/Hz]
    K0: float  # Friis parameter (linear)
    nu: float  # ADC energy coefficient [J]
    lambda_coef: float  # coding energy coefficient [J/bit]
    eps: float  # target outage probability
    n_p: int  # packet size [bit]

    def __post_init__(self):
        for name in ("P_tx", "B", "d", "ell", "N0", "K0", "nu", "lambda_coef"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise DomainError(f"{name} must be > 0, got {value!r}")
        if not 0.0 < self.eps < 1.0:
            raise DomainError(f"eps must be in (0, 1), got {self.eps!r}")
        if int(self.n_p) != self.n_p or self.n_p < 1:
            raise DomainError(f"n_p must be a positive integer, got {self.n_p!r}")


@dataclass(frozen=True)
class TxTimeStats:
    """Moments of the total transmission time of N packets under persistent ARQ."""

    N: Count
    t_p: float
    mean: float
    variance: float

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def gaussian_quantile(self, rho: float) -> float:
        """rho-quantile of the Gaussian approximation N(mean, variance)."""
        return self.mean + probit(rho) * self.std


def avg_snr(c: ChannelParams) -> float:
    """
    Average received SNR gamma0 = K0 * P_tx / (d^ell * N0 * B).

    Example:
        With K0 = 10^-2.7, P_tx = 0.3 W, d = 8 m, ell = 2, N0 = 1e-14 W/Hz and
        B = 100 MHz, gamma0 is about 9.35.
    """
    return c.K0 * c.P_tx / (c.d**c.ell * c.N0 * c.B)


def snr_threshold(c: ChannelParams) -> float:
    """Decoding threshold gamma_th = -gamma0 * ln(1 - eps) giving outage eps under Exp(1) gain."""
    return -avg_snr(c) * math.log1p(-c.eps)


def outage_rate(c: ChannelParams) -> float:
    """Shannon outage rate R(eps) = B * log2(1 + gamma_th) [bit/s]."""
    return c.B * math.log1p(snr_threshold(c)) / math.log(2.0)


def packet_time(c: ChannelParams) -> float:
    """Airtime of one packet, t_p = n_p / R(eps) [s]."""
    return c.n_p / outage_rate(c)


def energy_efficiency(c: ChannelParams) -> float:
    """
    Energy efficiency of the link.

    Args:
        c: Channel parameters

    Returns:
        eta = R / (P_tx + nu * B + lambda * R) [bit/J]
    """
    rate = outage_rate(c)
    return rate / (c.P_tx + c.nu * c.B + c.lambda_coef * rate)


def num_packets(Q: float, D: float, n_p: int, continuous: bool = False) -> Count:
    """
    Number of packets carrying a block of D bits compressed at ratio Q.

    Args:
        Q: Compression ratio, >= 1
        D: Block size [bit]
        n_p: Packet size [bit]
        continuous: Return the real-valued D / (Q * n_p) instead of its ceiling

    Returns:
        ceil(D / (Q * n_p)), or D / (Q * n_p) when continuous

    Example:
        >>> num_packets(1.0, 1001, 1000)
        2
        >>> num_packets(1.0, 1001, 1000, continuous=True)
        1.001
    """
    if not Q >= 1.0:
        raise DomainError(f"Q must be >= 1, got {Q!r}")
    packets = D / (Q * n_p)
    if continuous:
        return packets
    nearest = round(packets)
    # ratios that are integral up to rounding (e.g. Q = 1.25) must not gain a packet
    if abs(packets - nearest) <= 1e-9 * nearest:
        return int(nearest)
    return math.ceil(packets)


def _check_count(N: Count) -> None:
    if not (N > 0 and math.isfinite(N)):
        raise DomainError(f"packet count must be > 0, got {N!r}")


def tx_time_stats(N: Count, c: ChannelParams) -> TxTimeStats:
    """
    Mean and variance of the time needed to deliver N packets.

    Every packet needs a geometric number of attempts with success
    probability 1 - eps, so the total attempt count is negative binomial.

    Args:
        N: Packet count (integer, or real-valued in the continuous relaxation)
        c: Channel parameters

    Returns:
        TxTimeStats with mean N*t_p/(1-eps) and variance N*t_p^2*eps/(1-eps)^2
    """
    _check_count(N)
    t_p = packet_time(c)
    q = 1.0 - c.eps
    return TxTimeStats(
        N=N,
        t_p=t_p,
        mean=N * t_p / q,
        variance=N * t_p**2 * c.eps / q**2,
    )


def exact_tx_quantile(N: int, c: ChannelParams, rho: float) -> float:
    """rho-quantile of the transmission time from the exact negative-binomial attempt count."""
    if int(N) != N or N < 1:
        raise DomainError(f"exact quantile needs an integer packet count >= 1, got {N!r}")
    return nbinom_quantile(int(N), c.eps, rho) * packet_time(c)


def comm_energy(N: Count, c: ChannelParams) -> float:
    """Average energy to deliver N packets, n_p * N / ((1 - eps) * eta) [J]."""
    _check_count(N)
    return c.n_p * N / ((1.0 - c.eps) * energy_efficiency(c))
