"""Tests for the self-check suite."""

from pathlib import Path

import pytest

from elo_tradeoff.config_loaders import RunConfig, override_config
from elo_tradeoff.front_savers import save_validation_report
from elo_tradeoff.validation import (
    CheckResult,
    check_convexity,
    check_determinism,
    check_energy_identity,
    check_link_sampling,
    check_pareto_fronts,
    check_quantile_dominance,
    check_special_functions,
    check_success_shapes,
    check_time_solver,
    check_truncated_mean,
    check_tx_failure_enumeration,
    run_validation,
)


@pytest.fixture
def cfg() -> RunConfig:
    """Default configuration with a small Monte Carlo budget."""
    return override_config(RunConfig(), {"n_samples": 5000, "emax_list": (0.08, 0.1, 0.12)})


def assert_all_pass(results):
    failed = [r for r in results if not r.passed]
    assert not failed, failed


class TestAnalyticChecks:
    """Checks that need no sampling."""

    def test_special_functions(self):
        """Test the closed-form special function checks."""
        results = check_special_functions()
        assert [r.name for r in results] == ["gamma_quantile_exponential", "nbinom_cdf_bruteforce", "probit_0.9"]
        assert_all_pass(results)

    def test_tx_failure_enumeration(self):
        """Test tx_failure against all loss patterns."""
        assert_all_pass([check_tx_failure_enumeration()])

    def test_energy_identity(self, cfg: RunConfig):
        """Test the budget identity at random points."""
        result = check_energy_identity(cfg, draws=200)
        assert result.passed
        assert result.tolerance == 1e-9

    def test_convexity(self, cfg: RunConfig):
        """Test second differences on the feasible intervals."""
        assert_all_pass(check_convexity(cfg, step=0.01))

    def test_success_shapes(self, cfg: RunConfig):
        """Test the shape of the success probability curves."""
        results = check_success_shapes(cfg)
        assert [r.name for r in results] == ["success_vs_alpha_shape", "success_vs_q_shape"]
        assert_all_pass(results)

    def test_default_power_front_monotone(self):
        """Test the front checks on the default budget list, where several optima sit at fc_max."""
        results = {r.name: r for r in check_pareto_fronts(RunConfig())}
        assert results["power_front_monotone"].passed
        assert_all_pass(results.values())


class TestSamplingChecks:
    """Checks against Monte Carlo with a small sample."""

    def test_truncated_mean(self, cfg: RunConfig):
        """Test the truncated-mean and deadline-miss oracles."""
        results = check_truncated_mean(cfg)
        assert [r.name for r in results] == ["truncated_mean_oracle", "compression_failure_oracle"]
        assert_all_pass(results)

    def test_quantile_dominance(self, cfg: RunConfig):
        """Test that the analytic bound dominates the simulated quantile."""
        result = check_quantile_dominance(cfg)
        assert result.name == "quantile_dominance"
        assert result.passed

    def test_time_solver(self, cfg: RunConfig):
        """Test the solver against enumeration and simulated slots."""
        results = {r.name: r for r in check_time_solver(cfg)}
        assert set(results) == {"time_solver_bruteforce", "time_solver_reliability", "slot_energy_oracle"}
        assert results["time_solver_bruteforce"].deviation <= 1e-9
        assert_all_pass(results.values())

    def test_determinism(self, cfg: RunConfig):
        """Test that repeated sampling is reproducible."""
        assert check_determinism(cfg) == CheckResult("determinism", True, 0.0, 0.0)

    def test_link_sampling(self, cfg: RunConfig):
        """Test the outage, airtime and Gaussian trend checks."""
        results = {r.name: r for r in check_link_sampling(cfg)}
        assert set(results) == {"outage_frequency", "tx_time_moments", "gaussian_approx_trend"}
        assert_all_pass(results.values())


class TestRunValidation:
    """Tests for the full suite."""

    def test_default_config_passes(self):
        """Test that every check passes on the default configuration."""
        results = run_validation(RunConfig())
        assert len({r.name for r in results}) == len(results)
        assert_all_pass(results)

    def test_reports_are_byte_identical(self, tmp_path: Path):
        """Test that two runs of one configuration write the same report."""
        small = override_config(
            RunConfig(),
            {"n_samples": 2000, "emax_list": (0.1, 0.12), "t_list": (0.4, 0.5), "theta_time": 0.05},
        )
        first, second = tmp_path / "first.txt", tmp_path / "second.txt"
        save_validation_report(run_validation(small), first, small)
        save_validation_report(run_validation(small), second, small)
        assert first.read_bytes() == second.read_bytes()
