"""Tests for the time-constrained scenario."""

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from elo_tradeoff.comm_model import energy_efficiency, num_packets, packet_time
from elo_tradeoff.comp_model import compression_energy, compression_time_dist, cpu_power
from elo_tradeoff.errors import DomainError, Infeasible
from elo_tradeoff.fronts import TIME_COLUMNS
from elo_tradeoff.system_params import SystemParamsFactory
from elo_tradeoff.time_scenario import (
    TimeProblem,
    alpha_grid,
    alpha_max,
    comm_energy_time,
    comp_energy_time,
    compression_failure,
    fc_opt,
    pareto_front,
    q_grid,
    qaoi,
    solve,
    success_curve,
    success_probability,
    truncated_comp_mean,
    tx_count,
    tx_failure,
)
from elo_tradeoff.validation import exhaustive_time_optimum, frequency_lattice


@pytest.fixture
def prob() -> TimeProblem:
    """Time problem with a 0.4 s slot at rho = 0.99."""
    params = SystemParamsFactory.create_default()
    return TimeProblem(comp=params.comp, chan=params.chan, T=0.4, rho=0.99)


@pytest.fixture
def coarse(prob: TimeProblem) -> TimeProblem:
    """Same problem on a coarse grid."""
    return replace(prob, theta=0.05)


class TestTimeProblem:
    """Tests for TimeProblem validation."""

    def test_invalid_raises(self, prob: TimeProblem):
        """Test domain errors."""
        with pytest.raises(DomainError, match="T must be"):
            replace(prob, T=0.0)
        with pytest.raises(DomainError, match="theta"):
            replace(prob, theta=1.0)
        with pytest.raises(DomainError, match="rho"):
            replace(prob, rho=0.0)


class TestSlotSplit:
    """Tests for alpha_max, tx_count and qaoi."""

    def test_alpha_max(self, prob: TimeProblem):
        """Test 1 - ceil(D / (Q_max n_p)) t_p / T."""
        expected = 1.0 - 334 * packet_time(prob.chan) / 0.4
        assert alpha_max(prob) == pytest.approx(expected, rel=1e-12)
        assert 0.37 < alpha_max(prob) < 0.39

    def test_alpha_max_approaches_one(self, prob: TimeProblem):
        """Test that long slots leave almost everything to compression."""
        assert alpha_max(replace(prob, T=1e4)) > 0.9999

    def test_alpha_max_infeasible(self, prob: TimeProblem):
        """Test a slot too short for the fewest packets."""
        with pytest.raises(Infeasible, match="Q_max"):
            alpha_max(replace(prob, T=0.2))

    def test_tx_count(self, prob: TimeProblem):
        """Test floor((1 - alpha) T / t_p)."""
        t_p = packet_time(prob.chan)
        assert tx_count(0.0, prob) == math.floor(0.4 / t_p)
        assert tx_count(0.2, prob) == math.floor(0.8 * 0.4 / t_p)

    def test_tx_count_exact_multiple(self, prob: TimeProblem):
        """Test that a slot holding exactly k packets sends k."""
        exact = replace(prob, T=500 * packet_time(prob.chan))
        assert tx_count(0.0, exact) == 500

    def test_qaoi(self, prob: TimeProblem):
        """Test T + alpha T fc_max / f_b."""
        assert qaoi(0.0, prob) == 0.4
        assert qaoi(0.2, prob) == pytest.approx(0.48)


class TestFailureProbabilities:
    """Tests for compression_failure and tx_failure."""

    def test_compression_failure_sf(self, prob: TimeProblem):
        """Test eps_c = Pr[T_c > alpha T] against scipy."""
        scale = compression_time_dist(1.3, 1.2e9, prob.comp).scale
        expected = stats.gamma.sf(0.04, a=1.25, scale=scale)
        assert compression_failure(0.1, 1.3, 1.2e9, prob) == pytest.approx(expected, rel=1e-10)

    def test_compression_failure_edges(self, prob: TimeProblem):
        """Test alpha = 0 and Q = 1."""
        assert compression_failure(0.0, 1.2, 1.6e9, prob) == 1.0
        assert compression_failure(0.0, 1.0, 1.6e9, prob) == 0.0
        assert compression_failure(0.2, 1.0, 1.6e9, prob) == 0.0

    def test_compression_failure_decreasing_in_frequency(self, prob: TimeProblem):
        """Test that a faster CPU misses the deadline less often."""
        values = [compression_failure(0.1, 1.3, f, prob) for f in np.linspace(0.8e9, 2.5e9, 10)]
        assert all(b < a for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("n,n_tx,eps", [(1, 1, 0.5), (5, 9, 0.3), (417, 429, 0.001), (300, 400, 0.2)])
    def test_tx_failure_scipy(self, n: int, n_tx: int, eps: float):
        """Test Pr[Binomial(N_tx, 1-eps) < N] against scipy."""
        expected = stats.binom.cdf(n - 1, n_tx, 1.0 - eps)
        assert tx_failure(n, n_tx, eps) == pytest.approx(expected, rel=1e-6, abs=1e-300)

    def test_tx_failure_reduction(self):
        """Test that sending exactly N packets fails unless all arrive."""
        for n in (1, 4, 50):
            assert tx_failure(n, n, 0.1) == pytest.approx(1.0 - 0.9**n, rel=1e-12)

    def test_tx_failure_too_few_sent(self):
        """Test that N_tx < N always fails."""
        assert tx_failure(10, 9, 0.001) == 1.0

    def test_tx_failure_invalid_raises(self):
        """Test that N must be positive."""
        with pytest.raises(DomainError, match="N must be >= 1"):
            tx_failure(0, 5, 0.1)


class TestEnergies:
    """Tests for comp_energy_time, comm_energy_time and the truncated mean."""

    def test_truncated_mean_below_deadline(self, prob: TimeProblem):
        """Test 0 < E[T_c | T_c < alpha T] < alpha T."""
        value = truncated_comp_mean(0.1, 1.3, 1.2e9, prob)
        assert 0.0 < value < 0.04

    def test_literal_truncation_differs(self, prob: TimeProblem):
        """Test that the literal argument gives a different value."""
        standard = truncated_comp_mean(0.1, 1.3, 1.2e9, prob)
        literal = truncated_comp_mean(0.1, 1.3, 1.2e9, replace(prob, literal_truncation=True))
        assert literal != pytest.approx(standard, rel=1e-3)

    def test_truncated_mean_needs_positive_alpha(self, prob: TimeProblem):
        """Test alpha = 0 raises."""
        with pytest.raises(DomainError, match="alpha > 0"):
            truncated_comp_mean(0.0, 1.3, 1.2e9, prob)

    def test_comp_energy_bounded_by_deadline(self, prob: TimeProblem):
        """Test that the CPU never runs longer than alpha T."""
        energy = comp_energy_time(0.1, 1.3, 1.2e9, prob)
        assert 0.0 < energy < cpu_power(1.2e9, prob.comp) * 0.04

    def test_comp_energy_long_deadline(self, prob: TimeProblem):
        """Test that a generous deadline recovers the untruncated energy."""
        energy = comp_energy_time(0.35, 1.2, 2.5e9, prob)
        assert energy == pytest.approx(compression_energy(2.5e9, 1.2, prob.comp), rel=1e-6)

    def test_comp_energy_edges(self, prob: TimeProblem):
        """Test Q = 1 and alpha = 0 cost nothing."""
        assert comp_energy_time(0.2, 1.0, 1.6e9, prob) == 0.0
        assert comp_energy_time(0.0, 1.3, 1.6e9, prob) == 0.0

    def test_comm_energy(self, prob: TimeProblem):
        """Test n_p N_tx / eta."""
        expected = 1000 * tx_count(0.2, prob) / energy_efficiency(prob.chan)
        assert comm_energy_time(0.2, prob) == pytest.approx(expected, rel=1e-14)

    def test_success_probability_product(self, prob: TimeProblem):
        """Test P_succ = (1 - eps_c)(1 - eps_tx)."""
        result = success_probability(0.1, 1.3, 1.2e9, prob)
        assert result.P_succ == pytest.approx((1.0 - result.eps_c) * (1.0 - result.eps_tx), rel=1e-15)
        assert 0.0 < result.eps_c < 1.0


class TestFcOpt:
    """Tests for fc_opt."""

    def test_threshold_frequency(self, prob: TimeProblem):
        """Test that fc_opt is the lowest frequency meeting rho within fc_tol."""
        f_c = fc_opt(0.2, 1.2, prob)
        assert f_c is not None
        assert prob.comp.fc_min < f_c < prob.comp.fc_max
        assert success_probability(0.2, 1.2, f_c, prob).P_succ >= prob.rho
        assert success_probability(0.2, 1.2, f_c - prob.fc_tol, prob).P_succ < prob.rho

    def test_link_failure(self, prob: TimeProblem):
        """Test that too few transmitted packets cannot be rescued by the CPU."""
        assert fc_opt(0.3, 1.2, prob) is None

    def test_no_compression(self, prob: TimeProblem):
        """Test that Q = 1 needs only the slowest CPU."""
        assert fc_opt(0.0, 1.0, prob) == prob.comp.fc_min

    def test_unreachable(self, prob: TimeProblem):
        """Test that a tiny compression share cannot reach rho."""
        assert fc_opt(0.01, 1.5, prob) is None


class TestGrids:
    """Tests for the search grids."""

    def test_alpha_grid(self, coarse: TimeProblem):
        """Test spacing and upper limit."""
        grid = alpha_grid(coarse)
        assert grid[0] == 0.0
        assert grid[-1] <= alpha_max(coarse)
        assert grid == [round(0.05 * i, 12) for i in range(len(grid))]

    def test_q_grid(self, coarse: TimeProblem):
        """Test that the Q grid spans [1, Q_max]."""
        grid = q_grid(coarse)
        assert grid[0] == 1.0
        assert grid[-1] == 1.5
        assert len(grid) == 11


class TestSolve:
    """Tests for the time-scenario solver."""

    def test_matches_exhaustive_search(self, coarse: TimeProblem):
        """Test the optimum against enumeration of every grid point and lattice frequency."""
        sol = solve(coarse)
        alpha, q, f_c, energy = exhaustive_time_optimum(coarse)
        assert (alpha, q) == (sol.alpha_star, sol.Q_star)
        assert f_c == pytest.approx(sol.fc_star, rel=1e-12)
        assert energy == pytest.approx(sol.E_total, rel=1e-9)

    def test_frequency_on_bisection_lattice(self, coarse: TimeProblem):
        """Test that the returned frequency is a lattice point of the bisection."""
        lattice = frequency_lattice(coarse)
        assert lattice[0] == coarse.comp.fc_min
        assert lattice[-1] == coarse.comp.fc_max
        assert lattice[1] - lattice[0] <= coarse.fc_tol
        assert np.min(np.abs(lattice - solve(coarse).fc_star)) <= 1e-6

    def test_meets_reliability(self, coarse: TimeProblem):
        """Test P_succ >= rho and alpha* <= alpha_max."""
        sol = solve(coarse)
        assert sol.P_succ >= coarse.rho - 1e-12
        assert sol.alpha_star <= sol.alpha_max
        assert sol.qaoi == pytest.approx(qaoi(sol.alpha_star, coarse))

    def test_uses_compression(self, coarse: TimeProblem):
        """Test that the optimum compresses when raw data cannot fit."""
        sol = solve(coarse)
        assert sol.Q_star > 1.0
        assert num_packets(sol.Q_star, coarse.comp.D, coarse.chan.n_p) <= tx_count(sol.alpha_star, coarse)

    def test_infeasible_slot(self, coarse: TimeProblem):
        """Test that a slot too short raises Infeasible."""
        with pytest.raises(Infeasible):
            solve(replace(coarse, T=0.2))

    def test_print_summary(self, coarse: TimeProblem, capsys):
        """Test print_summary outputs the solution."""
        solve(coarse).print_summary()

        captured = capsys.readouterr()
        assert "Time scenario solution" in captured.out
        assert "P_succ" in captured.out


class TestParetoFront:
    """Tests for the T sweep."""

    def test_front_monotone(self, coarse: TimeProblem):
        """Test that energy never increases with the slot budget."""
        front = pareto_front([0.4, 0.45, 0.5], 0.99, coarse)
        assert len(front.feasible_rows) == 3
        assert front.is_monotone()

    def test_infeasible_row(self, coarse: TimeProblem):
        """Test that a short slot is reported explicitly."""
        front = pareto_front([0.2, 0.4], 0.99, coarse)
        assert front.rows[0]["feasible"] == 0
        assert front.rows[1]["feasible"] == 1
        assert list(front.to_dataframe().columns) == TIME_COLUMNS


class TestSuccessCurve:
    """Tests for success_curve."""

    def test_alpha_sweep_rises_then_collapses(self, prob: TimeProblem):
        """Test the shape of P_succ along alpha."""
        frame = success_curve(prob, "alpha", np.linspace(0.0, 0.3, 31), {"Q": 1.2, "fc": 1.6e9})
        p_succ = frame["P_succ"].to_numpy()
        assert p_succ[0] == 0.0
        assert p_succ.max() > 0.99
        assert p_succ[-1] == 0.0

    def test_q_sweep_peaks_inside(self, prob: TimeProblem):
        """Test that P_succ peaks at an interior Q."""
        frame = success_curve(prob, "Q", np.linspace(1.0, 1.5, 51), {"alpha": 0.2, "fc": 1.6e9})
        p_succ = frame["P_succ"].to_numpy()
        peak = int(np.argmax(p_succ))
        assert 0 < peak < 50
        assert p_succ[0] == 0.0
        assert p_succ[-1] < p_succ[peak]

    def test_columns(self, prob: TimeProblem):
        """Test the returned columns."""
        frame = success_curve(prob, "fc", [1e9, 2e9], {"alpha": 0.2, "Q": 1.2})
        assert list(frame.columns) == ["alpha", "Q", "fc", "eps_c", "eps_tx", "P_succ", "E_comp", "E_tx", "E_total"]
        assert frame["P_succ"].iloc[1] >= frame["P_succ"].iloc[0]

    def test_unknown_axis_raises(self, prob: TimeProblem):
        """Test that an unknown axis raises."""
        with pytest.raises(ValueError, match="Unknown axis"):
            success_curve(prob, "T", [0.4], {"alpha": 0.2, "Q": 1.2, "fc": 1e9})

    def test_missing_fixed_raises(self, prob: TimeProblem):
        """Test that the other two variables must be fixed."""
        with pytest.raises(ValueError, match="Missing fixed"):
            success_curve(prob, "alpha", [0.1], {"Q": 1.2})
