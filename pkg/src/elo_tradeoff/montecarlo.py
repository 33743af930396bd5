"""
Monte Carlo oracle for the analytic energy/latency formulas.

Samples are generated in fixed-size blocks; block b draws from its own
generator seeded with SeedSequence(seed, spawn_key=(b,)), so a given
(seed, n_samples, block_size) always yields the same stream regardless of
how the blocks are scheduled. With antithetic sampling every block pairs
each uniform u with 1 - u and maps both through the inverse CDF.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, Sequence, Tuple

import numpy as np
from scipy import stats

from elo_tradeoff.comm_model import ChannelParams, energy_efficiency, num_packets, packet_time
from elo_tradeoff.comp_model import (
    CompressionParams,
    GammaDist,
    compression_time_dist,
    cpu_power,
    decompression_scale,
)
from elo_tradeoff.errors import DomainError
from elo_tradeoff.power_scenario import PowerProblem
from elo_tradeoff.specfun import nbinom_cdf, nbinom_quantile, normal_cdf
from elo_tradeoff.time_scenario import TimeProblem, tx_count

logger = logging.getLogger(__name__)

# spawn key of the bootstrap generator, outside the range of block indices
_BOOTSTRAP_KEY = 2**32 - 1


@dataclass(frozen=True)
class SimConfig:
    """Sample size and seeding of a Monte Carlo run."""

    n_samples: int = 100_000
    seed: int = 20240501
    antithetic: bool = False
    block_size: int = 65536
    bootstrap_resamples: int = 200

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise DomainError(f"n_samples must be a positive integer, got {self.n_samples!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.block_size < 2:
            raise DomainError(f"block_size must be >= 2, got {self.block_size!r}")
        if self.bootstrap_resamples < 2:
            raise DomainError(f"bootstrap_resamples must be >= 2, got {self.bootstrap_resamples!r}")


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo estimate with its standard error."""

    value: float
    se: float
    n: int

    def within(self, target: float, n_se: float = 3.0) -> bool:
        """True if target lies within n_se standard errors (plus rounding slack)."""
        slack = 1e-12 * max(1.0, abs(target))
        return abs(self.value - target) <= n_se * self.se + slack


@dataclass(frozen=True)
class EmpiricalSummary:
    """Moments and quantiles of a sample, with standard errors."""

    n: int
    mean: float
    mean_se: float
    variance: float
    variance_se: float
    quantiles: Dict[float, float] = field(default_factory=dict)
    quantile_se: Dict[float, float] = field(default_factory=dict)


@dataclass(frozen=True)
class SlotEstimate:
    """Outcome frequencies of simulated time-scenario slots."""

    P_succ: Estimate
    mean_energy: Estimate


def _blocks(sim: SimConfig) -> Iterator[Tuple[np.random.Generator, int]]:
    remaining = sim.n_samples
    index = 0
    while remaining > 0:
        size = min(sim.block_size, remaining)
        yield np.random.default_rng(np.random.SeedSequence(sim.seed, spawn_key=(index,))), size
        remaining -= size
        index += 1


def _collect(sim: SimConfig, draw: Callable[[np.random.Generator, int], np.ndarray]) -> np.ndarray:
    return np.concatenate([draw(rng, size) for rng, size in _blocks(sim)])


def _antithetic_uniforms(rng: np.random.Generator, size: int) -> np.ndarray:
    half = rng.random((size + 1) // 2)
    return np.concatenate([half, 1.0 - half])[:size]


def _gamma_draws(rng: np.random.Generator, dist: GammaDist, size: int, antithetic: bool) -> np.ndarray:
    if dist.is_degenerate:
        return np.zeros(size)
    if antithetic:
        return stats.gamma.ppf(_antithetic_uniforms(rng, size), a=dist.shape, scale=dist.scale)
    return rng.gamma(dist.shape, dist.scale, size)


def _attempt_draws(rng: np.random.Generator, N: int, eps: float, size: int, antithetic: bool) -> np.ndarray:
    """Total attempts needed for N successes (N plus negative-binomial failures)."""
    if eps == 0.0:
        return np.full(size, N, dtype=np.int64)
    if antithetic:
        failures = stats.nbinom.ppf(_antithetic_uniforms(rng, size), N, 1.0 - eps)
        return N + failures.astype(np.int64)
    return N + rng.negative_binomial(N, 1.0 - eps, size)


def _received_draws(rng: np.random.Generator, n_tx: int, eps: float, size: int, antithetic: bool) -> np.ndarray:
    if antithetic:
        return stats.binom.ppf(_antithetic_uniforms(rng, size), n_tx, 1.0 - eps).astype(np.int64)
    return rng.binomial(n_tx, 1.0 - eps, size)


def _mean_estimate(samples: np.ndarray) -> Estimate:
    n = samples.size
    se = float(samples.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return Estimate(float(samples.mean()), se, n)


def _proportion_estimate(hits: np.ndarray) -> Estimate:
    n = hits.size
    p = float(hits.mean())
    return Estimate(p, math.sqrt(max(p * (1.0 - p), 0.0) / n), n)


def summarize(samples: np.ndarray, levels: Sequence[float], sim: SimConfig) -> EmpiricalSummary:
    """
    Moments and quantiles of a sample with bootstrap quantile standard errors.

    Standard errors use the i.i.d. formulas; with antithetic pairs they are
    conservative.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    mean = float(samples.mean())
    variance = float(samples.var(ddof=1)) if n > 1 else 0.0
    mean_se = math.sqrt(variance / n)
    m4 = float(np.mean((samples - mean) ** 4))
    variance_se = math.sqrt(max(m4 - variance**2, 0.0) / n)

    quantiles = {rho: float(np.quantile(samples, rho)) for rho in levels}
    boot_rng = np.random.default_rng(np.random.SeedSequence(sim.seed, spawn_key=(_BOOTSTRAP_KEY,)))
    boot = np.empty((sim.bootstrap_resamples, len(levels)))
    for i in range(sim.bootstrap_resamples):
        resample = samples[boot_rng.integers(0, n, n)]
        boot[i] = np.quantile(resample, list(levels))
    quantile_se = {rho: float(boot[:, j].std(ddof=1)) for j, rho in enumerate(levels)}
    return EmpiricalSummary(n, mean, mean_se, variance, variance_se, quantiles, quantile_se)


def sample_latency(
    Q: float,
    f_c: float,
    prob: PowerProblem,
    sim: SimConfig,
    levels: Sequence[float] = (),
) -> EmpiricalSummary:
    """
    Simulate end-to-end latencies (1 + zeta*f_c/f_b) * T_c + T_tx.

    T_c is a Gamma draw and T_tx the airtime of the negative-binomial number
    of attempts needed for ceil(D / (Q * n_p)) packets.

    Args:
        Q: Compression ratio
        f_c: CPU frequency [Hz]
        prob: Power problem supplying parameters and rho
        sim: Sampling configuration
        levels: Quantile levels to report; defaults to (prob.rho,)

    Returns:
        EmpiricalSummary of the latency sample
    """
    comp, chan = prob.comp, prob.chan
    dist = compression_time_dist(Q, f_c, comp)
    factor = decompression_scale(f_c, comp) if prob.include_decompression else 1.0
    packets = num_packets(Q, comp.D, chan.n_p)
    t_p = packet_time(chan)

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        comp_time = _gamma_draws(rng, dist, size, sim.antithetic)
        attempts = _attempt_draws(rng, packets, chan.eps, size, sim.antithetic)
        return factor * comp_time + attempts * t_p

    return summarize(_collect(sim, draw), tuple(levels) or (prob.rho,), sim)


def sample_tx_time(N: int, eps: float, t_p: float, sim: SimConfig) -> EmpiricalSummary:
    """Simulate the airtime of N packets under persistent ARQ with loss probability eps."""
    if not 0.0 <= eps < 1.0:
        raise DomainError(f"eps must be in [0, 1), got {eps!r}")
    samples = _collect(sim, lambda rng, size: _attempt_draws(rng, N, eps, size, sim.antithetic) * t_p)
    return summarize(samples, (0.5,), sim)


def sample_compression_time(Q: float, f_c: float, comp: CompressionParams, sim: SimConfig) -> np.ndarray:
    """Raw compression-time draws at (Q, f_c)."""
    dist = compression_time_dist(Q, f_c, comp)
    return _collect(sim, lambda rng, size: _gamma_draws(rng, dist, size, sim.antithetic))


def sample_truncated_mean(alpha: float, Q: float, f_c: float, prob: TimeProblem, sim: SimConfig) -> Estimate:
    """Conditional mean of the compression time among draws finishing before alpha*T."""
    samples = sample_compression_time(Q, f_c, prob.comp, sim)
    finished = samples[samples < alpha * prob.T]
    if finished.size < 2:
        raise DomainError(f"only {finished.size} of {samples.size} draws finish before alpha*T")
    return _mean_estimate(finished)


def compression_failure_frequency(alpha: float, Q: float, f_c: float, prob: TimeProblem, sim: SimConfig) -> Estimate:
    """Fraction of compression-time draws exceeding alpha*T."""
    samples = sample_compression_time(Q, f_c, prob.comp, sim)
    return _proportion_estimate(samples > alpha * prob.T)


def outage_frequency(c: ChannelParams, sim: SimConfig) -> Estimate:
    """Fraction of Exp(1) fading gains below gamma_th / gamma0 = -ln(1 - eps)."""
    threshold = -math.log1p(-c.eps)

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        if sim.antithetic:
            gains = -np.log1p(-_antithetic_uniforms(rng, size))
        else:
            gains = rng.exponential(1.0, size)
        return gains < threshold

    return _proportion_estimate(_collect(sim, draw))


def simulate_slot(
    alpha: float,
    Q: float,
    f_c: float,
    prob: TimeProblem,
    sim: SimConfig,
    skip_tx_on_comp_failure: bool = False,
) -> SlotEstimate:
    """
    Simulate slots of the time scenario.

    In each trial compression runs for min(T_c, alpha*T) at power P_c(f_c);
    it fails if T_c > alpha*T. All N_tx packets are then sent (unless
    skip_tx_on_comp_failure and compression failed) and the block is
    decoded iff at least ceil(D / (Q * n_p)) of them arrive.

    Returns:
        SlotEstimate with success frequency and mean energy per slot
    """
    comp, chan = prob.comp, prob.chan
    dist = compression_time_dist(Q, f_c, comp)
    deadline = alpha * prob.T
    power = cpu_power(f_c, comp)
    needed = num_packets(Q, comp.D, chan.n_p)
    n_tx = tx_count(alpha, prob)
    tx_energy = chan.n_p * n_tx / energy_efficiency(chan)

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        comp_time = _gamma_draws(rng, dist, size, sim.antithetic)
        comp_ok = comp_time <= deadline
        received = _received_draws(rng, n_tx, chan.eps, size, sim.antithetic)
        success = comp_ok & (received >= needed)
        energy = power * np.minimum(comp_time, deadline)
        if skip_tx_on_comp_failure:
            energy = energy + np.where(comp_ok, tx_energy, 0.0)
        else:
            energy = energy + tx_energy
        return np.stack([success.astype(float), energy])

    trials = np.concatenate([draw(rng, size) for rng, size in _blocks(sim)], axis=1)
    return SlotEstimate(
        P_succ=_proportion_estimate(trials[0]),
        mean_energy=_mean_estimate(trials[1]),
    )


def gaussian_approx_error(N: int, eps: float, t_p: float) -> float:
    """
    Sup-norm gap between the exact and the Gaussian transmission-time CDF.

    Compares nbinom_cdf(N, eps, k) with the Normal(mu_tx, sigma_tx^2) CDF at
    k * t_p for k from N to the 0.9999 quantile of the attempt count. For
    eps = 0 the Gaussian is a point mass whose CDF is taken as 1/2 at the
    atom, so the reported gap is 0.5.

    Returns:
        max_k |F_exact(k) - F_gauss(k * t_p)|
    """
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    if not 0.0 <= eps < 1.0:
        raise DomainError(f"eps must be in [0, 1), got {eps!r}")
    mu = N * t_p / (1.0 - eps)
    sigma = t_p * math.sqrt(eps * N) / (1.0 - eps)
    k_hi = nbinom_quantile(N, eps, 0.9999)
    worst = 0.0
    for k in range(int(N), k_hi + 1):
        x = k * t_p
        if sigma == 0.0:
            gauss = 0.5 if x == mu else float(x > mu)
        else:
            gauss = normal_cdf((x - mu) / sigma)
        worst = max(worst, abs(nbinom_cdf(N, eps, k) - gauss))
    logger.info("Gaussian approximation gap N=%d eps=%g: %.6g", N, eps, worst)
    return worst
