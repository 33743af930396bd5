"""
Self-checks of the analytic model against brute force and Monte Carlo.

run_validation() evaluates a fixed list of checks on a configuration and
returns one CheckResult per check. Monte Carlo checks draw from streams
derived from the configured seed, so a given configuration always yields the
same report.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from elo_tradeoff.comm_model import comm_energy, energy_efficiency, num_packets, packet_time, tx_time_stats
from elo_tradeoff.comp_model import compression_energy, mean_complexity
from elo_tradeoff.config_loaders import RunConfig
from elo_tradeoff.errors import Infeasible
from elo_tradeoff.montecarlo import (
    SimConfig,
    compression_failure_frequency,
    gaussian_approx_error,
    outage_frequency,
    sample_latency,
    sample_truncated_mean,
    sample_tx_time,
    simulate_slot,
)
from elo_tradeoff import power_scenario, time_scenario
from elo_tradeoff.specfun import gamma_quantile, nbinom_cdf, normal_cdf, probit
from elo_tradeoff.time_scenario import TimeProblem

logger = logging.getLogger(__name__)

N_SE = 3.0
BRUTE_FORCE_REL_TOL = 1e-9
DOMINANCE_LEVELS = (0.9, 0.99)
# (alpha, Q, f_c) points with partial truncation at T = min(t_list)
TRUNCATION_POINTS = (
    (0.05, 1.4, 1.2e9),
    (0.1, 1.5, 0.8e9),
    (0.2, 1.3, 2.0e9),
    (0.02, 1.1, 2.5e9),
    (0.35, 1.2, 1.6e9),
)
# operating point of the success-probability shape checks
SHAPE_T = 0.4
SHAPE_FC = 1.6e9
SHAPE_Q = 1.2
SHAPE_ALPHA = 0.2
SHAPE_RHO = 0.99
# success probability counted as collapsed
COLLAPSE_LEVEL = 0.01


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one validation check."""

    name: str
    passed: bool
    deviation: float
    tolerance: float


def _sub_sim(cfg: RunConfig, stream: int, scale: int = 1) -> SimConfig:
    """Independent sampling configuration for one check."""
    sequence = np.random.SeedSequence(cfg.sim.seed, spawn_key=(stream,))
    seed = int(sequence.generate_state(1, np.uint64)[0])
    return replace(cfg.sim, seed=seed, n_samples=cfg.sim.n_samples * scale)


def _upper_check(name: str, deviation: float, tolerance: float) -> CheckResult:
    return CheckResult(name, bool(deviation <= tolerance), float(deviation), float(tolerance))


def check_energy_identity(cfg: RunConfig, draws: int = 1000) -> CheckResult:
    """E_comp(fc_star(Q), Q) + E_tx(Q) equals E_max at random budgets and ratios."""
    prob = cfg.power_problem()
    comp, chan = prob.comp, prob.chan
    c = prob.comm_constant
    rng = np.random.default_rng(np.random.SeedSequence(cfg.sim.seed, spawn_key=(1,)))
    worst = 0.0
    accepted = 0
    while accepted < draws:
        e_max = float(rng.uniform(0.08, 0.2))
        q = float(rng.uniform(1.0, comp.Q_max))
        if q == 1.0 or e_max <= c / q:
            continue
        candidate = replace(prob, E_max=e_max)
        f_c = power_scenario.fc_star(q, candidate).unclipped
        total = compression_energy(f_c, q, comp, enforce_bounds=False) + comm_energy(
            num_packets(q, comp.D, chan.n_p, continuous=True), chan
        )
        worst = max(worst, abs(total - e_max) / e_max)
        accepted += 1
    return _upper_check("energy_identity", worst, 1e-9)


def check_quantile_dominance(cfg: RunConfig) -> CheckResult:
    """
    The analytic bound dominates the simulated latency quantile.

    Ratios are placed at Q = D / (n_p * N) for integer N so that the
    continuous and the integer packet counts coincide.
    """
    prob = cfg.power_problem(E_max=max(cfg.emax_list))
    comp, chan = prob.comp, prob.chan
    n_lo = num_packets(comp.Q_max, comp.D, chan.n_p)
    n_hi = math.floor(comp.D / (1.1 * chan.n_p))
    counts = sorted({int(round(n)) for n in np.linspace(n_lo, n_hi, 5)})
    sim = _sub_sim(cfg, 2)
    worst = -math.inf
    for n in counts:
        q = comp.D / (chan.n_p * n)
        for f_c in np.linspace(comp.fc_min, comp.fc_max, 5):
            summary = sample_latency(q, float(f_c), prob, sim, levels=DOMINANCE_LEVELS)
            for rho in DOMINANCE_LEVELS:
                level = replace(prob, rho=rho)
                bound = power_scenario.latency_quantile_bound(q, float(f_c), level).total
                excess = summary.quantiles[rho] - N_SE * summary.quantile_se[rho] - bound
                worst = max(worst, excess / bound)
    return _upper_check("quantile_dominance", worst, 0.0)


def _second_difference_floor(
    fn: Callable[[float], float], grid: Sequence[float], mask: Sequence[bool]
) -> float:
    """Most negative relative second difference of fn over consecutive masked grid triples."""
    values = [fn(q) for q in grid]
    worst = 0.0
    for i in range(1, len(grid) - 1):
        if mask[i - 1] and mask[i] and mask[i + 1]:
            worst = min(worst, (values[i - 1] - 2.0 * values[i] + values[i + 1]) / abs(values[i]))
    return worst


def check_convexity(cfg: RunConfig, step: float = 0.005) -> List[CheckResult]:
    """beta(Q) and the latency bound are convex where the convexity condition holds."""
    beta_worst = 0.0
    objective_worst = 0.0
    for e_max in cfg.emax_list:
        prob = cfg.power_problem(E_max=e_max)
        try:
            q_lo, q_hi = power_scenario.feasible_q_interval(prob)
        except Infeasible:
            continue
        grid = [float(q) for q in np.arange(max(q_lo, 1.0 + step), q_hi, step)]
        mask = [power_scenario.convexity_condition(q, prob) for q in grid]
        beta = _second_difference_floor(lambda q: power_scenario.beta_of_q(q, prob), grid, mask)
        bound = _second_difference_floor(lambda q: power_scenario.objective(q, prob), grid, mask)
        beta_worst = min(beta_worst, beta)
        objective_worst = min(objective_worst, bound)
    return [
        _upper_check("beta_convexity", -beta_worst, 1e-6),
        _upper_check("latency_bound_convexity", -objective_worst, 1e-6),
    ]


def check_special_functions() -> List[CheckResult]:
    """Gamma quantile, negative-binomial CDF and probit against closed forms."""
    exp_worst = 0.0
    for scale in (0.5, 1.0, 3.0):
        for rho in np.linspace(0.01, 0.99, 25):
            exact = -scale * math.log1p(-rho)
            exp_worst = max(exp_worst, abs(gamma_quantile(1.0, scale, float(rho)) - exact) / exact)

    nb_worst = 0.0
    for eps in (0.1, 0.5, 0.9):
        for n in range(1, 11):
            cumulative = 0.0
            for k in range(n, 41):
                cumulative += math.comb(k - 1, n - 1) * (1.0 - eps) ** n * eps ** (k - n)
                nb_worst = max(nb_worst, abs(nbinom_cdf(n, eps, k) - cumulative))

    lo, hi = 0.0, 5.0
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if normal_cdf(mid) < 0.9:
            lo = mid
        else:
            hi = mid
    return [
        _upper_check("gamma_quantile_exponential", exp_worst, 1e-10),
        _upper_check("nbinom_cdf_bruteforce", nb_worst, 1e-12),
        _upper_check("probit_0.9", abs(probit(0.9) - 0.5 * (lo + hi)), 1e-8),
    ]


def check_tx_failure_enumeration() -> CheckResult:
    """tx_failure against explicit enumeration of all loss patterns."""
    worst = 0.0
    for eps in (0.1, 0.5):
        for n_tx in range(0, 17):
            patterns = np.arange(2**n_tx, dtype=np.int64)
            received = np.zeros(patterns.size, dtype=np.int64)
            for bit in range(n_tx):
                received += (patterns >> bit) & 1
            weights = (1.0 - eps) ** received * eps ** (n_tx - received)
            for n in range(1, 9):
                brute = float(weights[received < n].sum())
                worst = max(worst, abs(time_scenario.tx_failure(n, n_tx, eps) - brute))
        for n in range(1, 9):
            worst = max(worst, abs(time_scenario.tx_failure(n, n, eps) - (1.0 - (1.0 - eps) ** n)))
    return _upper_check("tx_failure_enumeration", worst, 1e-12)


def check_truncated_mean(cfg: RunConfig) -> List[CheckResult]:
    """Truncated compression mean and deadline-miss probability against sampling."""
    prob = replace(cfg.time_problem(T=min(cfg.t_list)), literal_truncation=False)
    sim = _sub_sim(cfg, 3, scale=10)
    mean_worst = 0.0
    failure_worst = 0.0
    for alpha, q, f_c in TRUNCATION_POINTS:
        est = sample_truncated_mean(alpha, q, f_c, prob, sim)
        exact_mean = time_scenario.truncated_comp_mean(alpha, q, f_c, prob)
        mean_worst = max(mean_worst, abs(est.value - exact_mean) / est.se)
        freq = compression_failure_frequency(alpha, q, f_c, prob, sim)
        exact = time_scenario.compression_failure(alpha, q, f_c, prob)
        if freq.se > 0.0:
            failure_worst = max(failure_worst, abs(freq.value - exact) / freq.se)
        else:
            failure_worst = max(failure_worst, 0.0 if abs(freq.value - exact) < 1e-6 else math.inf)
    return [
        _upper_check("truncated_mean_oracle", mean_worst, N_SE),
        _upper_check("compression_failure_oracle", failure_worst, N_SE),
    ]


def frequency_lattice(prob: TimeProblem) -> np.ndarray:
    """Frequencies the fc_opt bisection can return: fc_min plus multiples of span / 2^m."""
    comp = prob.comp
    span = comp.fc_max - comp.fc_min
    halvings = 0
    while span / 2.0**halvings > prob.fc_tol:
        halvings += 1
    steps = 2**halvings
    return comp.fc_min + span * np.arange(steps + 1, dtype=float) / steps


def exhaustive_time_optimum(prob: TimeProblem) -> Optional[Tuple[float, float, float, float]]:
    """
    Time-scenario optimum by plain enumeration of the solver grid.

    Every (alpha, Q) grid point is scored at every frequency of the bisection
    lattice, with probabilities from scipy.stats instead of the model's own
    special functions. The cheapest point wins; ties go to the lower alpha,
    then the lower Q.

    Returns:
        (alpha, Q, f_c, energy), or None when no grid point reaches rho
    """
    comp, chan = prob.comp, prob.chan
    frequencies = frequency_lattice(prob)
    power = comp.Ps_max * (frequencies / comp.fc_max) ** 3
    joules_per_packet = chan.n_p / energy_efficiency(chan)
    best: Optional[Tuple[float, float, float, float]] = None
    for alpha in time_scenario.alpha_grid(prob):
        sent = time_scenario.tx_count(alpha, prob)
        e_tx = joules_per_packet * sent
        for q in time_scenario.q_grid(prob):
            needed = num_packets(q, comp.D, chan.n_p)
            if sent < needed:
                continue
            link = float(stats.binom.sf(needed - 1, sent, 1.0 - chan.eps))
            if link < prob.rho:
                continue
            if q == 1.0:
                candidate = (e_tx, alpha, q, comp.fc_min)
            elif alpha == 0.0:
                continue
            else:
                limit = alpha * prob.T
                scale = mean_complexity(q, comp) * comp.D / (comp.kappa * frequencies)
                done = stats.gamma.cdf(limit, a=comp.kappa, scale=scale)
                meets = np.flatnonzero(done * link >= prob.rho)
                if meets.size == 0:
                    continue
                i = int(meets[0])
                mean_done = comp.kappa * scale[i] * stats.gamma.cdf(limit, a=comp.kappa + 1.0, scale=scale[i])
                busy = mean_done + (1.0 - done[i]) * limit
                candidate = (float(busy * power[i]) + e_tx, alpha, q, float(frequencies[i]))
            if best is None or candidate[:3] < best[:3]:
                best = candidate
    if best is None:
        return None
    energy, alpha, q, f_c = best
    return alpha, q, f_c, energy


def check_time_solver(cfg: RunConfig) -> List[CheckResult]:
    """Time-scenario optimum against plain enumeration and against simulated slots."""
    prob = replace(
        cfg.time_problem(T=min(cfg.t_list), rho=max(cfg.rho_list), theta=0.02),
        literal_truncation=False,
    )
    try:
        sol = time_scenario.solve(prob)
    except Infeasible as exc:
        logger.error("Time solver check infeasible: %s", exc.reason)
        return [CheckResult("time_solver_bruteforce", False, math.inf, 0.0)]

    brute = exhaustive_time_optimum(prob)
    if brute is None:
        results = [CheckResult("time_solver_bruteforce", False, math.inf, 0.0)]
    else:
        alpha, q, f_c, energy = brute
        same = (
            alpha == sol.alpha_star
            and q == sol.Q_star
            and math.isclose(f_c, sol.fc_star, rel_tol=1e-12)
            and math.isclose(energy, sol.E_total, rel_tol=BRUTE_FORCE_REL_TOL)
        )
        gap = abs(energy - sol.E_total) / sol.E_total
        results = [CheckResult("time_solver_bruteforce", bool(same), float(gap), BRUTE_FORCE_REL_TOL)]

    slot = simulate_slot(
        sol.alpha_star, sol.Q_star, sol.fc_star, prob, _sub_sim(cfg, 4),
        skip_tx_on_comp_failure=cfg.skip_tx_on_comp_failure,
    )
    if slot.P_succ.se > 0.0:
        shortfall = (prob.rho - slot.P_succ.value) / slot.P_succ.se
    else:
        shortfall = 0.0 if slot.P_succ.value >= prob.rho else math.inf
    results.append(_upper_check("time_solver_reliability", shortfall, N_SE))
    if not cfg.skip_tx_on_comp_failure:
        z = abs(slot.mean_energy.value - sol.E_total) / slot.mean_energy.se
        results.append(_upper_check("slot_energy_oracle", z, N_SE))
    return results


def check_pareto_fronts(cfg: RunConfig) -> List[CheckResult]:
    """Front monotonicity, the gain over no compression and the energy saved by longer slots."""
    power_prob = cfg.power_problem(rho=min(cfg.rho_list))
    power = power_scenario.pareto_front(cfg.emax_list, power_prob.rho, power_prob)
    power_rows = power.feasible_rows
    power_ok = power.is_monotone() and len(power_rows) == len(power.rows)

    baseline = power_scenario.objective(1.0, power_prob)
    budget_rows = [r for r in power_rows if r["E_max"] >= power_prob.comm_constant]
    gain = max((r["latency_bound"] - baseline) / baseline for r in budget_rows) if budget_rows else -1.0

    time_prob = cfg.time_problem(rho=max(cfg.rho_list))
    time_front = time_scenario.pareto_front(cfg.t_list, time_prob.rho, time_prob)
    time_rows = time_front.feasible_rows
    time_ok = time_front.is_monotone() and len(time_rows) == len(time_front.rows)
    if time_ok and len(time_rows) >= 2:
        reduction = 1.0 - time_rows[-1]["E_total"] / time_rows[0]["E_total"]
    else:
        reduction = 0.0
    return [
        CheckResult("power_front_monotone", bool(power_ok), 0.0 if power_ok else 1.0, 0.0),
        CheckResult("power_front_beats_uncompressed", bool(gain < 0.0), float(gain), 0.0),
        CheckResult("time_front_monotone", bool(time_ok), 0.0 if time_ok else 1.0, 0.0),
        CheckResult("time_front_energy_reduction", bool(reduction >= 0.05), float(reduction), 0.05),
    ]


def check_success_shapes(cfg: RunConfig) -> List[CheckResult]:
    """
    Success probability along alpha and along Q.

    Along alpha on [0, 1) it starts at 0, peaks above rho inside the range and
    collapses below COLLAPSE_LEVEL. Along Q it is collapsed at Q = 1 and peaks
    above rho inside the range.
    """
    prob = cfg.time_problem(T=SHAPE_T, rho=SHAPE_RHO)
    alphas = np.round(np.arange(0.0, 1.0, 0.005), 12)
    fixed = {"Q": SHAPE_Q, "fc": SHAPE_FC}
    along_alpha = time_scenario.success_curve(prob, "alpha", alphas, fixed)["P_succ"].to_numpy()
    peak = int(np.argmax(along_alpha))
    alpha_ok = along_alpha[0] == 0.0 and along_alpha[-1] < COLLAPSE_LEVEL and 0 < peak < len(alphas) - 1
    alpha_gap = SHAPE_RHO - float(along_alpha.max())

    ratios = np.round(np.arange(1.0, prob.comp.Q_max + 1e-9, 0.01), 12)
    fixed = {"alpha": SHAPE_ALPHA, "fc": SHAPE_FC}
    along_q = time_scenario.success_curve(prob, "Q", ratios, fixed)["P_succ"].to_numpy()
    peak_q = int(np.argmax(along_q))
    q_ok = along_q[0] < COLLAPSE_LEVEL and 0 < peak_q < len(ratios) - 1
    q_gap = SHAPE_RHO - float(along_q.max())
    return [
        CheckResult("success_vs_alpha_shape", bool(alpha_ok and alpha_gap < 0.0), alpha_gap, 0.0),
        CheckResult("success_vs_q_shape", bool(q_ok and q_gap < 0.0), q_gap, 0.0),
    ]


def check_determinism(cfg: RunConfig) -> CheckResult:
    """Repeated sampling with the same configuration gives identical results."""
    prob = cfg.power_problem()
    sim = replace(_sub_sim(cfg, 5), n_samples=min(cfg.sim.n_samples, 20_000))
    first = sample_latency(SHAPE_Q, SHAPE_FC, prob, sim, levels=DOMINANCE_LEVELS)
    second = sample_latency(SHAPE_Q, SHAPE_FC, prob, sim, levels=DOMINANCE_LEVELS)
    same = first == second
    return CheckResult("determinism", bool(same), 0.0 if same else 1.0, 0.0)


def check_link_sampling(cfg: RunConfig) -> List[CheckResult]:
    """Outage rate, ARQ airtime moments and the Gaussian approximation trend."""
    chan = cfg.params.chan
    outage = outage_frequency(chan, _sub_sim(cfg, 6))
    outage_z = abs(outage.value - chan.eps) / outage.se

    packets = num_packets(SHAPE_Q, cfg.params.comp.D, chan.n_p)
    tx_stats = tx_time_stats(packets, chan)
    sample = sample_tx_time(packets, chan.eps, tx_stats.t_p, _sub_sim(cfg, 7))
    moment_z = max(
        abs(sample.mean - tx_stats.mean) / sample.mean_se,
        abs(sample.variance - tx_stats.variance) / sample.variance_se,
    )

    t_p = packet_time(chan)
    small, large = gaussian_approx_error(50, 0.1, t_p), gaussian_approx_error(500, 0.1, t_p)
    return [
        _upper_check("outage_frequency", outage_z, N_SE),
        _upper_check("tx_time_moments", moment_z, N_SE),
        CheckResult("gaussian_approx_trend", bool(large < small), large - small, 0.0),
    ]


def run_validation(cfg: RunConfig) -> List[CheckResult]:
    """
    Run every check on a configuration.

    Args:
        cfg: Run configuration; its sim settings drive the Monte Carlo checks

    Returns:
        CheckResults in a fixed order

    Example:
        >>> results = run_validation(RunConfig())
        >>> all(r.passed for r in results)
        True
    """
    results: List[CheckResult] = [check_energy_identity(cfg), check_quantile_dominance(cfg)]
    results.extend(check_convexity(cfg))
    results.extend(check_special_functions())
    results.append(check_tx_failure_enumeration())
    results.extend(check_truncated_mean(cfg))
    results.extend(check_time_solver(cfg))
    results.extend(check_pareto_fronts(cfg))
    results.extend(check_success_shapes(cfg))
    results.append(check_determinism(cfg))
    results.extend(check_link_sampling(cfg))

    for r in results:
        level = logging.INFO if r.passed else logging.WARNING
        status = "PASS" if r.passed else "FAIL"
        logger.log(level, "%-34s %s deviation=%.6g tolerance=%.6g", r.name, status, r.deviation, r.tolerance)
    failed = sum(1 for r in results if not r.passed)
    logger.info("Validation finished: %d/%d checks passed", len(results) - failed, len(results))
    return results
