"""
Power-constrained scenario: minimize the rho-quantile of the end-to-end
latency subject to an average energy budget E_max.

For a fixed compression ratio Q the energy constraint is active at the
optimum, which pins the CPU frequency to fc_star(Q). The latency quantile is
upper-bounded by the sum of the compression-time quantile (Gamma) and the
transmission-time quantile (Gaussian approximation of the negative-binomial
attempt count), leaving a scalar search over Q.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import pandas as pd

from elo_tradeoff.comm_model import (
    ChannelParams,
    comm_energy,
    energy_efficiency,
    exact_tx_quantile,
    num_packets,
    tx_time_stats,
)
from elo_tradeoff.comp_model import (
    CompressionParams,
    compression_energy,
    compression_time_dist,
    decompression_scale,
    mean_complexity,
)
from elo_tradeoff.errors import ConvergenceError, DegenerateQ, DomainError, Infeasible
from elo_tradeoff.fronts import ParetoFront, Row, infeasible_row
from elo_tradeoff.specfun import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_SCAN_POINTS = 64
# final bracket width as a fraction of theta
_POLISH = 1e-4


@dataclass(frozen=True)
class PowerProblem:
    """Latency-quantile minimization under an energy budget."""

    comp: CompressionParams
    chan: ChannelParams
    E_max: float  # energy budget [J]
    rho: float  # reliability quantile
    theta: float = 1e-3  # search precision on Q
    include_decompression: bool = True  # apply 1 + zeta*f_c/f_b to the compression quantile
    tol: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self):
        if not (self.E_max > 0.0 and math.isfinite(self.E_max)):
            raise DomainError(f"E_max must be > 0, got {self.E_max!r}")
        if not 0.0 < self.rho < 1.0:
            raise DomainError(f"rho must be in (0, 1), got {self.rho!r}")
        if not self.theta > 0.0:
            raise DomainError(f"theta must be > 0, got {self.theta!r}")

    @property
    def comm_constant(self) -> float:
        """C = D / ((1 - eps) * eta), the uncompressed communication energy [J]."""
        return self.comp.D / ((1.0 - self.chan.eps) * energy_efficiency(self.chan))

    @property
    def energy_coefficient(self) -> float:
        """D * Ps_max / fc_max^3, so that E_comp = coefficient * (e^(psi*Q) - e^psi) * f_c^2."""
        return self.comp.D * self.comp.power_coefficient


class FcStar(NamedTuple):
    unclipped: float
    clipped: float
    was_clipped: bool


class LatencyBound(NamedTuple):
    total: float
    comp_quantile: float
    tx_quantile: float


@dataclass(frozen=True)
class PowerSolution:
    """Optimum of a PowerProblem."""

    E_max: float
    rho: float
    Q_star: float
    fc_star: float
    latency_bound: float
    comp_quantile: float
    tx_quantile: float
    E_comp: float
    E_tx: float
    convexity_certified: bool
    clipped: bool
    is_baseline: bool  # Q = 1, no compression
    exact_tx_quantile: float  # transmission quantile with ceiled N and the exact attempt distribution

    @property
    def E_total(self) -> float:
        return self.E_comp + self.E_tx

    def to_row(self) -> Row:
        return {
            "E_max": self.E_max,
            "latency_bound": self.latency_bound,
            "Q_star": self.Q_star,
            "fc_star": self.fc_star,
            "E_comp": self.E_comp,
            "E_tx": self.E_tx,
            "comp_quantile": self.comp_quantile,
            "tx_quantile": self.tx_quantile,
            "exact_tx_quantile": self.exact_tx_quantile,
            "convexity_certified": int(self.convexity_certified),
            "clipped": int(self.clipped),
            "is_baseline": int(self.is_baseline),
            "feasible": 1,
            "reason": "",
        }

    def print_summary(self) -> None:
        """Print the solution."""
        print(f"\n{'='*60}")
        print(f"Power scenario solution (E_max = {self.E_max:.4g} J, rho = {self.rho})")
        print(f"{'='*60}")
        print(f"{'Q*':<28} {self.Q_star:.6f}{'  (no compression)' if self.is_baseline else ''}")
        print(f"{'f_c* [GHz]':<28} {self.fc_star / 1e9:.6f}{'  (clipped)' if self.clipped else ''}")
        print(f"{'Latency bound [s]':<28} {self.latency_bound:.6g}")
        print(f"{'  compression quantile [s]':<28} {self.comp_quantile:.6g}")
        print(f"{'  transmission quantile [s]':<28} {self.tx_quantile:.6g}")
        print(f"{'  exact tx quantile [s]':<28} {self.exact_tx_quantile:.6g}")
        print(f"{'E_comp [J]':<28} {self.E_comp:.6g}")
        print(f"{'E_tx [J]':<28} {self.E_tx:.6g}")
        print(f"{'Convexity certified':<28} {self.convexity_certified}")
        print()


def _check_ratio(Q: float, prob: PowerProblem) -> None:
    if not 1.0 <= Q <= prob.comp.Q_max:
        raise DomainError(f"Q must be in [1, {prob.comp.Q_max!r}], got {Q!r}")


def fc_star(Q: float, prob: PowerProblem) -> FcStar:
    """
    CPU frequency that spends the whole energy budget at compression ratio Q.

    Args:
        Q: Compression ratio in (1, Q_max]
        prob: Problem instance

    Returns:
        FcStar with the analytic value, its projection on [fc_min, fc_max]
        and whether the projection changed it

    Raises:
        DegenerateQ: At Q = 1, where no compression takes place
        Infeasible: If communication alone uses up the budget
    """
    _check_ratio(Q, prob)
    if Q == 1.0:
        raise DegenerateQ("fc_star is undefined at Q = 1 (nothing to compress)")
    residual = prob.E_max - prob.comm_constant / Q
    if residual <= 0.0:
        raise Infeasible(
            f"communication at Q={Q!r} needs {prob.comm_constant / Q:.6g} J >= E_max={prob.E_max!r} J"
        )
    unclipped = math.sqrt(residual / (mean_complexity(Q, prob.comp) * prob.energy_coefficient))
    clipped = min(max(unclipped, prob.comp.fc_min), prob.comp.fc_max)
    return FcStar(unclipped, clipped, clipped != unclipped)


def latency_quantile_bound(Q: float, f_c: float, prob: PowerProblem) -> LatencyBound:
    """
    Upper bound on the rho-quantile of the end-to-end latency.

    The bound is the sum of the (decompression-scaled) Gamma quantile of the
    compression time and the Gaussian quantile of the transmission time, with
    the continuous packet count D / (Q * n_p).

    Args:
        Q: Compression ratio in [1, Q_max]; Q = 1 has a zero compression addend
        f_c: CPU frequency in [fc_min, fc_max]
        prob: Problem instance

    Returns:
        LatencyBound(total, comp_quantile, tx_quantile) in seconds
    """
    dist = compression_time_dist(Q, f_c, prob.comp)
    comp_q = dist.quantile(prob.rho, prob.tol)
    if prob.include_decompression:
        comp_q *= decompression_scale(f_c, prob.comp)
    packets = num_packets(Q, prob.comp.D, prob.chan.n_p, continuous=True)
    tx_q = tx_time_stats(packets, prob.chan).gaussian_quantile(prob.rho)
    return LatencyBound(comp_q + tx_q, comp_q, tx_q)


def beta_of_q(Q: float, prob: PowerProblem) -> float:
    """
    Compression-time scale at fc_star(Q), as a function of Q alone.

    beta(Q) = K * sqrt((e^(psi*Q) - e^psi)^3 / (E_max - C/Q)) with
    K = sqrt(D * Ps_max / fc_max^3) / kappa, so that
    beta(Q) * kappa * fc_star(Q) = e^(psi*Q) - e^psi.
    """
    _check_ratio(Q, prob)
    residual = prob.E_max - prob.comm_constant / Q
    if residual <= 0.0:
        raise Infeasible(f"no energy left for compression at Q={Q!r}")
    k = math.sqrt(prob.energy_coefficient) / prob.comp.kappa
    return k * math.sqrt(mean_complexity(Q, prob.comp) ** 3 / residual)


def _convexity_quadratic(Q: float, prob: PowerProblem) -> float:
    a = 3.0 * prob.comp.psi**2 * math.exp(prob.comp.psi)
    return a * Q * Q - 2.0 * Q * prob.E_max + prob.comm_constant


def convexity_condition(Q: float, prob: PowerProblem) -> bool:
    """True iff 3*psi^2*e^psi*Q^2 - 2*E_max*Q + C >= 0 at Q."""
    return _convexity_quadratic(Q, prob) >= 0.0


def convexity_holds_on(lo: float, hi: float, prob: PowerProblem) -> bool:
    """Whether the convexity condition holds on the whole interval [lo, hi]."""
    a = 3.0 * prob.comp.psi**2 * math.exp(prob.comp.psi)
    vertex = min(max(prob.E_max / a, lo), hi)
    return _convexity_quadratic(vertex, prob) >= 0.0


def _bisect_root(fn: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Root of fn on [lo, hi] given a sign change; returns the end with fn >= 0."""
    f_lo = fn(lo)
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if (fn(mid) >= 0.0) == (f_lo >= 0.0):
            lo = mid
        else:
            hi = mid
    return hi if f_lo < 0.0 else lo


def feasible_q_interval(prob: PowerProblem) -> Tuple[float, float]:
    """
    Range of compression ratios whose fc_star is not below fc_min.

    A frequency below fc_min cannot be raised without overspending the
    budget, so Q is restricted to h(Q) >= 0 with
    h(Q) = E_max - C/Q - (D*Ps_max/fc_max^3) * fc_min^2 * (e^(psi*Q) - e^psi).
    h is concave, so the feasible set is an interval.

    Returns:
        (q_lo, q_hi) within [1, Q_max]

    Raises:
        Infeasible: If no compressed configuration fits the budget
    """
    comp = prob.comp
    c = prob.comm_constant
    floor_energy = prob.energy_coefficient * comp.fc_min**2

    if prob.E_max <= c / comp.Q_max:
        raise Infeasible(
            f"communication at Q_max needs {c / comp.Q_max:.6g} J >= E_max={prob.E_max!r} J"
        )

    def h(q: float) -> float:
        return prob.E_max - c / q - floor_energy * mean_complexity(q, comp)

    def slope(q: float) -> float:
        return c / (q * q) - floor_energy * comp.psi * math.exp(comp.psi * q)

    # peak of the concave h
    if slope(comp.Q_max) >= 0.0:
        peak = comp.Q_max
    elif slope(1.0) <= 0.0:
        peak = 1.0
    else:
        peak = _bisect_root(slope, 1.0, comp.Q_max, 1e-14)
    if h(peak) < 0.0:
        raise Infeasible(
            f"E_max={prob.E_max!r} J cannot cover communication plus compression at fc_min"
        )

    q_lo = 1.0 if h(1.0) >= 0.0 else _bisect_root(h, 1.0, peak, 1e-14)
    q_hi = comp.Q_max if h(comp.Q_max) >= 0.0 else _bisect_root(h, peak, comp.Q_max, 1e-14)
    logger.debug("Feasible Q interval for E_max=%g: [%.12g, %.12g]", prob.E_max, q_lo, q_hi)
    return q_lo, q_hi


def _baseline_bound(prob: PowerProblem) -> LatencyBound:
    packets = num_packets(1.0, prob.comp.D, prob.chan.n_p, continuous=True)
    tx_q = tx_time_stats(packets, prob.chan).gaussian_quantile(prob.rho)
    return LatencyBound(tx_q, 0.0, tx_q)


def objective(Q: float, prob: PowerProblem) -> float:
    """Latency bound at (Q, clipped fc_star(Q)); the uncompressed bound at Q = 1."""
    if Q == 1.0:
        return _baseline_bound(prob).total
    return latency_quantile_bound(Q, fc_star(Q, prob).clipped, prob).total


def _derivative_sign_bisection(
    fn: Callable[[float], float], lo: float, hi: float, theta: float
) -> Tuple[float, float, int]:
    """Bisection on the sign of a central difference; assumes fn is unimodal. Returns the final bracket."""
    iterations = 0
    while hi - lo > theta:
        iterations += 1
        mid = 0.5 * (lo + hi)
        delta = min(0.25 * theta, mid - lo, hi - mid)
        if fn(mid + delta) - fn(mid - delta) > 0.0:
            hi = mid
        else:
            lo = mid
    return lo, hi, iterations


def _scan_bracket(fn: Callable[[float], float], lo: float, hi: float) -> Tuple[float, float]:
    """Neighbours of the best point on a uniform grid over [lo, hi]."""
    step = (hi - lo) / _SCAN_POINTS
    grid = [lo + i * step for i in range(_SCAN_POINTS)] + [hi]
    values = [fn(q) for q in grid]
    best = min(range(len(grid)), key=lambda i: (values[i], i))
    return grid[max(best - 1, 0)], grid[min(best + 1, len(grid) - 1)]


def _golden_section(
    fn: Callable[[float], float], a: float, b: float, width: float, max_iter: int
) -> Tuple[float, int]:
    """Golden-section search on [a, b] down to the given bracket width."""
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    iterations = 0
    while b - a > width:
        iterations += 1
        if iterations > max_iter:
            raise ConvergenceError("golden-section search did not converge", (a, b))
        if f2 > f1:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = fn(x2)
    return 0.5 * (a + b), iterations


def _make_solution(Q: float, prob: PowerProblem, certified: bool) -> PowerSolution:
    comp, chan = prob.comp, prob.chan
    exact_n = num_packets(Q, comp.D, chan.n_p)
    exact_tx = exact_tx_quantile(exact_n, chan, prob.rho)
    packets = num_packets(Q, comp.D, chan.n_p, continuous=True)
    if Q == 1.0:
        bound = _baseline_bound(prob)
        return PowerSolution(
            E_max=prob.E_max,
            rho=prob.rho,
            Q_star=1.0,
            fc_star=comp.fc_min,
            latency_bound=bound.total,
            comp_quantile=0.0,
            tx_quantile=bound.tx_quantile,
            E_comp=0.0,
            E_tx=comm_energy(packets, chan),
            convexity_certified=certified,
            clipped=False,
            is_baseline=True,
            exact_tx_quantile=exact_tx,
        )
    fc = fc_star(Q, prob)
    bound = latency_quantile_bound(Q, fc.clipped, prob)
    return PowerSolution(
        E_max=prob.E_max,
        rho=prob.rho,
        Q_star=Q,
        fc_star=fc.clipped,
        latency_bound=bound.total,
        comp_quantile=bound.comp_quantile,
        tx_quantile=bound.tx_quantile,
        E_comp=compression_energy(fc.clipped, Q, comp),
        E_tx=comm_energy(packets, chan),
        convexity_certified=certified,
        clipped=fc.was_clipped,
        is_baseline=False,
        exact_tx_quantile=exact_tx,
    )


def solve(prob: PowerProblem) -> PowerSolution:
    """
    Minimize the latency quantile bound over the compression ratio.

    Searches Q over the feasible interval to precision theta with
    derivative-sign bisection when the convexity condition holds on the
    whole interval, and with a golden-section scan otherwise. The interval
    end points and, when the budget allows it, the uncompressed Q = 1
    configuration are compared against the interior optimum.

    Args:
        prob: Problem instance

    Returns:
        PowerSolution at the best point found

    Raises:
        Infeasible: If no configuration satisfies the energy budget
    """
    q_lo, q_hi = feasible_q_interval(prob)
    certified = convexity_holds_on(q_lo, q_hi, prob)

    def fn(q: float) -> float:
        return objective(q, prob)

    if certified:
        lo, hi, iterations = _derivative_sign_bisection(fn, q_lo, q_hi, prob.theta)
    else:
        logger.warning(
            "Convexity condition fails on [%.6g, %.6g] for E_max=%g; using golden-section scan",
            q_lo, q_hi, prob.E_max,
        )
        lo, hi = _scan_bracket(fn, q_lo, q_hi)
        iterations = 0
    q_best, polish = _golden_section(fn, lo, hi, prob.theta * _POLISH, prob.tol.max_iter)
    iterations += polish

    candidates = [q_best, q_lo, q_hi]
    if prob.E_max >= prob.comm_constant:
        candidates.append(1.0)
    best = min(candidates, key=lambda q: (fn(q), q))
    logger.debug(
        "Power solve E_max=%g rho=%g: Q*=%.6g after %d iterations (certified=%s)",
        prob.E_max, prob.rho, best, iterations, certified,
    )
    return _make_solution(best, prob, certified)


def _solve_row(prob: PowerProblem) -> Row:
    try:
        return solve(prob).to_row()
    except Infeasible as exc:
        logger.warning("E_max=%g J infeasible: %s", prob.E_max, exc.reason)
        return infeasible_row("power", prob.E_max, exc.reason)


def pareto_front(
    E_max_list: Sequence[float],
    rho: float,
    prob_template: PowerProblem,
    max_workers: Optional[int] = None,
) -> ParetoFront:
    """
    Sweep the energy budget and collect the optimal latency bounds.

    Args:
        E_max_list: Energy budgets [J], nonempty
        rho: Reliability quantile
        prob_template: Problem whose parameters are reused for every budget
        max_workers: Thread count for concurrent solves (None or 1: serial)

    Returns:
        ParetoFront sorted by E_max, with explicit infeasible rows
    """
    if not E_max_list:
        raise ValueError("E_max_list must not be empty")
    problems = [replace(prob_template, E_max=float(e), rho=rho) for e in E_max_list]
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(_solve_row, problems))
    else:
        rows = [_solve_row(p) for p in problems]
    return ParetoFront(scenario="power", rho=rho, rows=rows)


def latency_curve(prob: PowerProblem, q_values: Sequence[float]) -> pd.DataFrame:
    """
    Optimal frequency and latency bound along a grid of compression ratios.

    Points where fc_star is undefined, or falls below fc_min so that no
    frequency fits the budget, are kept with NaN values and feasible = 0.

    Returns:
        DataFrame with columns Q, fc_unclipped, fc_star, clipped,
        comp_quantile, tx_quantile, latency_bound, feasible
    """
    records: List[Row] = []
    for q in q_values:
        record: Row = {"Q": q}
        try:
            if q == 1.0:
                if prob.E_max < prob.comm_constant:
                    raise Infeasible("uncompressed transmission exceeds E_max")
                bound = _baseline_bound(prob)
                record.update(fc_unclipped=math.nan, fc_star=math.nan, clipped=0)
            else:
                fc = fc_star(q, prob)
                if fc.unclipped < prob.comp.fc_min:
                    raise Infeasible(f"fc_star below fc_min at Q={q!r}")
                bound = latency_quantile_bound(q, fc.clipped, prob)
                record.update(fc_unclipped=fc.unclipped, fc_star=fc.clipped, clipped=int(fc.was_clipped))
            record.update(
                comp_quantile=bound.comp_quantile,
                tx_quantile=bound.tx_quantile,
                latency_bound=bound.total,
                feasible=1,
            )
        except Infeasible:
            record.update(
                fc_unclipped=math.nan,
                fc_star=math.nan,
                clipped=0,
                comp_quantile=math.nan,
                tx_quantile=math.nan,
                latency_bound=math.nan,
                feasible=0,
            )
        records.append(record)
    columns = ["Q", "fc_unclipped", "fc_star", "clipped", "comp_quantile", "tx_quantile", "latency_bound", "feasible"]
    return pd.DataFrame(records, columns=columns)
