"""
Time-constrained scenario: minimize the total energy of delivering one block
within a slot of T seconds with overall success probability at least rho.

A fraction alpha of the slot is given to compression (which is cut off at the
deadline alpha*T) and the rest carries floor((1-alpha)*T/t_p) coded packets,
any N = ceil(D/(Q*n_p)) of which decode the block. The solver scans an
(alpha, Q) grid and, at each point, lowers f_c by bisection until the
reliability constraint becomes tight.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from elo_tradeoff.comm_model import ChannelParams, energy_efficiency, num_packets, packet_time
from elo_tradeoff.comp_model import CompressionParams, compression_time_dist, cpu_power
from elo_tradeoff.errors import DomainError, Infeasible
from elo_tradeoff.fronts import ParetoFront, Row, infeasible_row
from elo_tradeoff.specfun import DEFAULT_TOLERANCES, Tolerances, binom_tails, reg_lower_gamma

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeProblem:
    """Energy minimization under a slot budget and a reliability target."""

    comp: CompressionParams
    chan: ChannelParams
    T: float  # slot budget [s]
    rho: float  # reliability target
    theta: float = 0.01  # grid step on alpha and Q
    fc_tol: float = 1e6  # bisection tolerance on f_c [Hz]
    literal_truncation: bool = False  # evaluate the truncated mean at x = scale / (alpha*T)
    tol: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self):
        if not (self.T > 0.0 and math.isfinite(self.T)):
            raise DomainError(f"T must be > 0, got {self.T!r}")
        if not 0.0 < self.rho < 1.0:
            raise DomainError(f"rho must be in (0, 1), got {self.rho!r}")
        if not 0.0 < self.theta < 1.0:
            raise DomainError(f"theta must be in (0, 1), got {self.theta!r}")
        if not self.fc_tol > 0.0:
            raise DomainError(f"fc_tol must be > 0, got {self.fc_tol!r}")


class SuccessBreakdown(NamedTuple):
    P_succ: float
    eps_c: float
    eps_tx: float


@dataclass(frozen=True)
class TimeSolution:
    """Optimum of a TimeProblem."""

    T: float
    rho: float
    alpha_star: float
    Q_star: float
    fc_star: float
    eps_c: float
    eps_tx: float
    P_succ: float
    E_comp: float
    E_tx: float
    qaoi: float
    alpha_max: float

    @property
    def E_total(self) -> float:
        return self.E_comp + self.E_tx

    def to_row(self) -> Row:
        return {
            "T": self.T,
            "qaoi": self.qaoi,
            "E_total": self.E_total,
            "alpha_star": self.alpha_star,
            "Q_star": self.Q_star,
            "fc_star": self.fc_star,
            "P_succ": self.P_succ,
            "eps_c": self.eps_c,
            "eps_tx": self.eps_tx,
            "E_comp": self.E_comp,
            "E_tx": self.E_tx,
            "feasible": 1,
            "reason": "",
        }

    def print_summary(self) -> None:
        """Print the solution."""
        print(f"\n{'='*60}")
        print(f"Time scenario solution (T = {self.T:.4g} s, rho = {self.rho})")
        print(f"{'='*60}")
        print(f"{'alpha* (alpha_max)':<24} {self.alpha_star:.4f} ({self.alpha_max:.4f})")
        print(f"{'Q*':<24} {self.Q_star:.4f}")
        print(f"{'f_c* [GHz]':<24} {self.fc_star / 1e9:.6f}")
        print(f"{'P_succ':<24} {self.P_succ:.8f}")
        print(f"{'  eps_c':<24} {self.eps_c:.3e}")
        print(f"{'  eps_tx':<24} {self.eps_tx:.3e}")
        print(f"{'E_comp [J]':<24} {self.E_comp:.6g}")
        print(f"{'E_tx [J]':<24} {self.E_tx:.6g}")
        print(f"{'E_total [J]':<24} {self.E_total:.6g}")
        print(f"{'QAoI [s]':<24} {self.qaoi:.6g}")
        print()


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"alpha must be in [0, 1), got {alpha!r}")


def alpha_max(prob: TimeProblem) -> float:
    """
    Largest compression share that still leaves room for the fewest packets.

    alpha_max = 1 - ceil(D / (Q_max * n_p)) * t_p / T.

    Raises:
        Infeasible: If even maximal compression does not fit in T
    """
    n_min = num_packets(prob.comp.Q_max, prob.comp.D, prob.chan.n_p)
    airtime = n_min * packet_time(prob.chan)
    if airtime > prob.T:
        raise Infeasible(
            f"{n_min} packets need {airtime:.6g} s > T={prob.T!r} s even at Q_max"
        )
    return max(0.0, 1.0 - airtime / prob.T)


def compression_failure(alpha: float, Q: float, f_c: float, prob: TimeProblem) -> float:
    """
    Probability eps_c that compression misses its deadline alpha*T.

    Returns:
        1 - P(kappa, alpha*T / scale); 0 at Q = 1, 1 at alpha = 0 for Q > 1
    """
    _check_alpha(alpha)
    dist = compression_time_dist(Q, f_c, prob.comp)
    if dist.is_degenerate:
        return 0.0
    if alpha == 0.0:
        return 1.0
    return dist.sf(alpha * prob.T, prob.tol)


def tx_count(alpha: float, prob: TimeProblem) -> int:
    """Packets sent in the transmission share, floor((1 - alpha) * T / t_p)."""
    _check_alpha(alpha)
    slots = (1.0 - alpha) * prob.T / packet_time(prob.chan)
    # absorb rounding of T / t_p just below an integer
    return math.floor(slots * (1.0 + 1e-12))


@lru_cache(maxsize=65536)
def tx_failure(N: int, N_tx: int, eps: float) -> float:
    """
    Probability that fewer than N of N_tx coded packets arrive.

    Args:
        N: Packets needed to decode, >= 1
        N_tx: Packets sent
        eps: Per-packet loss probability

    Returns:
        sum_{h=0}^{N-1} C(N_tx, h) (1-eps)^h eps^(N_tx-h); 1 when N_tx < N
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N!r}")
    if N_tx < N:
        return 1.0
    return binom_tails(N_tx, 1.0 - eps, N - 1)[0]


def truncated_comp_mean(alpha: float, Q: float, f_c: float, prob: TimeProblem) -> float:
    """
    Mean compression time given that compression finishes within alpha*T.

    Args:
        alpha: Compression share of the slot, > 0
        Q: Compression ratio (0 is returned at Q = 1)
        f_c: CPU frequency [Hz]
        prob: Problem instance; literal_truncation selects the
            x = scale / (alpha*T) argument instead of x = alpha*T / scale

    Returns:
        E[T_c | T_c < alpha*T] [s]
    """
    _check_alpha(alpha)
    if alpha == 0.0:
        raise DomainError("truncated mean needs alpha > 0")
    dist = compression_time_dist(Q, f_c, prob.comp)
    limit = alpha * prob.T
    if not prob.literal_truncation:
        return dist.truncated_mean(limit, prob.tol)
    if dist.is_degenerate:
        return 0.0
    x = dist.scale / limit
    lower = reg_lower_gamma(dist.shape, x, prob.tol)
    if lower <= 0.0:
        return dist.scale * x * dist.shape / (dist.shape + 1.0)
    return dist.scale * dist.shape * reg_lower_gamma(dist.shape + 1.0, x, prob.tol) / lower


def comp_energy_time(alpha: float, Q: float, f_c: float, prob: TimeProblem) -> float:
    """
    Average compression energy when compression is cut off at alpha*T.

    E_c = ((1 - eps_c) * E[T_c | T_c < alpha*T] + eps_c * alpha*T) * P_c(f_c)
    """
    eps_c = compression_failure(alpha, Q, f_c, prob)
    if Q == 1.0 or alpha == 0.0:
        return 0.0
    busy = eps_c * alpha * prob.T
    if eps_c < 1.0:
        busy += (1.0 - eps_c) * truncated_comp_mean(alpha, Q, f_c, prob)
    return busy * cpu_power(f_c, prob.comp)


def comm_energy_time(alpha: float, prob: TimeProblem) -> float:
    """Energy of the transmission share, n_p * N_tx / eta [J]."""
    return prob.chan.n_p * tx_count(alpha, prob) / energy_efficiency(prob.chan)


def qaoi(alpha: float, prob: TimeProblem) -> float:
    """Query age of information T + alpha*T * fc_max / f_b, with worst-case decompression."""
    _check_alpha(alpha)
    return prob.T + alpha * prob.T * prob.comp.fc_max / prob.comp.f_b


def success_probability(alpha: float, Q: float, f_c: float, prob: TimeProblem) -> SuccessBreakdown:
    """Overall success probability (1 - eps_c)(1 - eps_tx) and its two factors."""
    eps_c = compression_failure(alpha, Q, f_c, prob)
    needed = num_packets(Q, prob.comp.D, prob.chan.n_p)
    eps_tx = tx_failure(needed, tx_count(alpha, prob), prob.chan.eps)
    return SuccessBreakdown((1.0 - eps_c) * (1.0 - eps_tx), eps_c, eps_tx)


def fc_opt(alpha: float, Q: float, prob: TimeProblem) -> Optional[float]:
    """
    Lowest CPU frequency meeting the reliability target at (alpha, Q).

    eps_c decreases in f_c and eps_tx does not depend on it, so the
    threshold frequency is found by bisection to within fc_tol.

    Returns:
        Frequency in [fc_min, fc_max] [Hz], or None when even fc_max
        (or an error-free compression) cannot reach rho
    """
    comp = prob.comp
    needed = num_packets(Q, comp.D, prob.chan.n_p)
    eps_tx = tx_failure(needed, tx_count(alpha, prob), prob.chan.eps)
    link_success = 1.0 - eps_tx
    if link_success < prob.rho:
        return None
    if Q == 1.0:
        return comp.fc_min

    def meets(f_c: float) -> bool:
        return (1.0 - compression_failure(alpha, Q, f_c, prob)) * link_success >= prob.rho

    if meets(comp.fc_min):
        return comp.fc_min
    if not meets(comp.fc_max):
        return None
    lo, hi = comp.fc_min, comp.fc_max
    while hi - lo > prob.fc_tol:
        mid = 0.5 * (lo + hi)
        if meets(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _grid(start: float, stop: float, step: float) -> List[float]:
    count = math.floor((stop - start) / step + 1e-9)
    return [round(start + i * step, 12) for i in range(count + 1)]


def alpha_grid(prob: TimeProblem) -> List[float]:
    """alpha values 0, theta, 2*theta, ... up to min(alpha_max, 1 - theta)."""
    return _grid(0.0, min(alpha_max(prob), 1.0 - prob.theta), prob.theta)


def q_grid(prob: TimeProblem) -> List[float]:
    """Q values 1, 1 + theta, ... up to Q_max."""
    return _grid(1.0, prob.comp.Q_max, prob.theta)


def evaluate_point(alpha: float, Q: float, prob: TimeProblem) -> Optional[Tuple[float, float]]:
    """(f_c, total energy) at the threshold frequency of (alpha, Q), or None if infeasible."""
    if tx_count(alpha, prob) < num_packets(Q, prob.comp.D, prob.chan.n_p):
        return None
    f_c = fc_opt(alpha, Q, prob)
    if f_c is None:
        return None
    return f_c, comp_energy_time(alpha, Q, f_c, prob) + comm_energy_time(alpha, prob)


def solve(prob: TimeProblem) -> TimeSolution:
    """
    Exhaustive (alpha, Q) grid search with an inner frequency bisection.

    Ties are broken by lowest energy, then lowest alpha, then lowest Q.

    Raises:
        Infeasible: If no grid point reaches the reliability target
    """
    a_max = alpha_max(prob)
    best: Optional[Tuple[float, float, float, float]] = None
    evaluated = 0
    for alpha in alpha_grid(prob):
        for q in q_grid(prob):
            point = evaluate_point(alpha, q, prob)
            evaluated += 1
            if point is None:
                continue
            f_c, energy = point
            key = (energy, alpha, q, f_c)
            if best is None or key[:3] < best[:3]:
                best = key
    if best is None:
        raise Infeasible(f"no (alpha, Q) grid point reaches rho={prob.rho!r} within T={prob.T!r} s")

    energy, alpha, q, f_c = best
    logger.debug(
        "Time solve T=%g rho=%g: alpha*=%g Q*=%g f_c*=%.6g E=%.6g (%d grid points)",
        prob.T, prob.rho, alpha, q, f_c, energy, evaluated,
    )
    success = success_probability(alpha, q, f_c, prob)
    return TimeSolution(
        T=prob.T,
        rho=prob.rho,
        alpha_star=alpha,
        Q_star=q,
        fc_star=f_c,
        eps_c=success.eps_c,
        eps_tx=success.eps_tx,
        P_succ=success.P_succ,
        E_comp=comp_energy_time(alpha, q, f_c, prob),
        E_tx=comm_energy_time(alpha, prob),
        qaoi=qaoi(alpha, prob),
        alpha_max=a_max,
    )


def _solve_row(prob: TimeProblem) -> Row:
    try:
        return solve(prob).to_row()
    except Infeasible as exc:
        logger.warning("T=%g s infeasible: %s", prob.T, exc.reason)
        return infeasible_row("time", prob.T, exc.reason)


def pareto_front(
    T_list: Sequence[float],
    rho: float,
    prob_template: TimeProblem,
    max_workers: Optional[int] = None,
) -> ParetoFront:
    """
    Sweep the slot budget and collect the minimum energies.

    Returns:
        ParetoFront sorted by T, with explicit infeasible rows
    """
    if not T_list:
        raise ValueError("T_list must not be empty")
    problems = [replace(prob_template, T=float(t), rho=rho) for t in T_list]
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(_solve_row, problems))
    else:
        rows = [_solve_row(p) for p in problems]
    return ParetoFront(scenario="time", rho=rho, rows=rows)


CURVE_AXES = ("alpha", "Q", "fc")


def success_curve(
    prob: TimeProblem,
    axis: str,
    values: Sequence[float],
    fixed: Dict[str, float],
) -> pd.DataFrame:
    """
    Success probability and energy along one decision variable.

    Args:
        prob: Problem instance
        axis: Variable to sweep: "alpha", "Q" or "fc"
        values: Points along the axis
        fixed: Values of the two other variables, keyed by name

    Returns:
        DataFrame with columns alpha, Q, fc, eps_c, eps_tx, P_succ, E_comp, E_tx, E_total

    Example:
        >>> success_curve(prob, "alpha", np.linspace(0, 0.95, 96), {"Q": 1.2, "fc": 1.6e9})
    """
    if axis not in CURVE_AXES:
        raise ValueError(f"Unknown axis: {axis}. Available: {list(CURVE_AXES)}")
    missing = [name for name in CURVE_AXES if name != axis and name not in fixed]
    if missing:
        raise ValueError(f"Missing fixed values for {missing}")

    records = []
    for value in np.asarray(values, dtype=float):
        point = {name: float(fixed.get(name, math.nan)) for name in CURVE_AXES}
        point[axis] = float(value)
        alpha, q, f_c = point["alpha"], point["Q"], point["fc"]
        success = success_probability(alpha, q, f_c, prob)
        e_comp = comp_energy_time(alpha, q, f_c, prob)
        e_tx = comm_energy_time(alpha, prob)
        records.append(
            {
                "alpha": alpha,
                "Q": q,
                "fc": f_c,
                "eps_c": success.eps_c,
                "eps_tx": success.eps_tx,
                "P_succ": success.P_succ,
                "E_comp": e_comp,
                "E_tx": e_tx,
                "E_total": e_comp + e_tx,
            }
        )
    return pd.DataFrame(records)
