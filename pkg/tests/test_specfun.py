"""Tests for special functions."""

import math

import pytest
from scipy import special, stats

from elo_tradeoff.errors import DomainError
from elo_tradeoff.specfun import (
    Tolerances,
    binom_cdf,
    binom_tails,
    gamma_quantile,
    log_gamma,
    nbinom_cdf,
    nbinom_quantile,
    normal_cdf,
    probit,
    reg_lower_gamma,
    reg_upper_gamma,
)

GAMMA_POINTS = [
    (0.5, 0.1),
    (1.0, 1.0),
    (1.25, 0.3),
    (1.25, 2.5),
    (1.25, 12.0),
    (3.0, 2.0),
    (7.5, 10.0),
    (40.0, 35.0),
]


class TestTolerances:
    """Tests for the Tolerances dataclass."""

    def test_defaults(self):
        """Test default convergence controls."""
        tol = Tolerances()
        assert tol.abs_tol == 1e-12
        assert tol.rel_tol == 1e-10
        assert tol.max_iter == 200

    def test_invalid_raises(self):
        """Test that non-positive controls are rejected."""
        with pytest.raises(DomainError, match="max_iter"):
            Tolerances(max_iter=0)
        with pytest.raises(DomainError, match="abs_tol"):
            Tolerances(abs_tol=0.0)


class TestLogGamma:
    """Tests for log_gamma."""

    def test_factorial(self):
        """Test ln Gamma(n) = ln((n-1)!)."""
        assert log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-14)

    def test_half(self):
        """Test Gamma(1/2) = sqrt(pi)."""
        assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-14)

    def test_non_positive_raises(self):
        """Test that x <= 0 raises."""
        with pytest.raises(DomainError, match="x > 0"):
            log_gamma(0.0)


class TestRegularizedGamma:
    """Tests for the regularized incomplete gamma functions."""

    @pytest.mark.parametrize("s,x", GAMMA_POINTS)
    def test_lower_matches_scipy(self, s: float, x: float):
        """Test P(s, x) against scipy.special.gammainc."""
        assert reg_lower_gamma(s, x) == pytest.approx(special.gammainc(s, x), rel=1e-10, abs=1e-15)

    @pytest.mark.parametrize("s,x", GAMMA_POINTS)
    def test_upper_matches_scipy(self, s: float, x: float):
        """Test Q(s, x) against scipy.special.gammaincc."""
        assert reg_upper_gamma(s, x) == pytest.approx(special.gammaincc(s, x), rel=1e-10, abs=1e-15)

    @pytest.mark.parametrize("s,x", GAMMA_POINTS)
    def test_complement(self, s: float, x: float):
        """Test P + Q = 1."""
        assert reg_lower_gamma(s, x) + reg_upper_gamma(s, x) == pytest.approx(1.0, abs=1e-14)

    def test_upper_tail_relative_accuracy(self):
        """Test that a far upper tail keeps relative precision."""
        assert reg_upper_gamma(1.25, 60.0) == pytest.approx(special.gammaincc(1.25, 60.0), rel=1e-9)

    def test_exponential_case(self):
        """Test P(1, x) = 1 - exp(-x)."""
        for x in (0.01, 0.5, 2.0, 9.0):
            assert reg_lower_gamma(1.0, x) == pytest.approx(-math.expm1(-x), rel=1e-12)

    def test_edges(self):
        """Test x = 0 and x = inf."""
        assert reg_lower_gamma(2.0, 0.0) == 0.0
        assert reg_upper_gamma(2.0, 0.0) == 1.0
        assert reg_lower_gamma(2.0, math.inf) == 1.0
        assert reg_upper_gamma(2.0, math.inf) == 0.0

    def test_monotone_in_x(self):
        """Test that P(s, x) is nondecreasing in x."""
        values = [reg_lower_gamma(1.25, 0.05 * i) for i in range(200)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_invalid_arguments_raise(self):
        """Test domain errors for bad shape or limit."""
        with pytest.raises(DomainError, match="shape"):
            reg_lower_gamma(0.0, 1.0)
        with pytest.raises(DomainError, match="x >= 0"):
            reg_lower_gamma(1.0, -1.0)
        with pytest.raises(DomainError, match="x >= 0"):
            reg_upper_gamma(1.0, math.nan)


class TestGammaQuantile:
    """Tests for gamma_quantile."""

    @pytest.mark.parametrize("shape", [0.5, 1.0, 1.25, 4.0, 30.0])
    @pytest.mark.parametrize("rho", [0.01, 0.5, 0.9, 0.99, 0.999])
    def test_matches_scipy(self, shape: float, rho: float):
        """Test against scipy.stats.gamma.ppf."""
        expected = stats.gamma.ppf(rho, a=shape, scale=2.0)
        assert gamma_quantile(shape, 2.0, rho) == pytest.approx(expected, rel=1e-9)

    def test_exponential_closed_form(self):
        """Test that shape 1 gives -scale * ln(1 - rho)."""
        for rho in (0.1, 0.5, 0.9, 0.999):
            assert gamma_quantile(1.0, 3.0, rho) == pytest.approx(-3.0 * math.log1p(-rho), rel=1e-10)

    def test_inverts_cdf(self):
        """Test P(shape, q / scale) = rho at the returned quantile."""
        q = gamma_quantile(1.25, 0.01, 0.99)
        assert reg_lower_gamma(1.25, q / 0.01) == pytest.approx(0.99, abs=1e-11)

    @pytest.mark.parametrize("shape", [0.05, 0.1, 0.3])
    @pytest.mark.parametrize("rho", [0.1, 0.5, 0.9])
    def test_small_shape_matches_scipy(self, shape: float, rho: float):
        """Test shapes below one, where the density is unbounded at zero."""
        expected = stats.gamma.ppf(rho, a=shape)
        assert gamma_quantile(shape, 1.0, rho) == pytest.approx(expected, rel=1e-8)

    def test_tiny_shape_does_not_overflow(self):
        """Test a quantile deep in the subnormal range, where the density overflows."""
        shape, rho = 0.0017343, 0.28778
        q = gamma_quantile(shape, 1.0, rho)
        assert 0.0 < q < 1e-300
        assert reg_lower_gamma(shape, q) == pytest.approx(rho, abs=1e-10)

    def test_increasing_in_rho(self):
        """Test that quantiles increase with the level."""
        levels = [0.1, 0.5, 0.9, 0.99, 0.999]
        quantiles = [gamma_quantile(1.25, 1.0, r) for r in levels]
        assert quantiles == sorted(quantiles)

    def test_invalid_level_raises(self):
        """Test that rho outside (0, 1) raises."""
        with pytest.raises(DomainError, match="rho in"):
            gamma_quantile(1.25, 1.0, 1.0)
        with pytest.raises(DomainError, match="scale"):
            gamma_quantile(1.25, 0.0, 0.5)


class TestNormal:
    """Tests for normal_cdf and probit."""

    @pytest.mark.parametrize("rho", [1e-6, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999, 1 - 1e-6])
    def test_probit_matches_scipy(self, rho: float):
        """Test probit against scipy.stats.norm.ppf."""
        assert probit(rho) == pytest.approx(stats.norm.ppf(rho), rel=1e-9, abs=1e-12)

    def test_probit_known_values(self):
        """Test tabulated quantiles."""
        assert probit(0.9) == pytest.approx(1.2815515655446004, abs=1e-8)
        assert probit(0.975) == pytest.approx(1.959963984540054, abs=1e-8)
        assert probit(0.5) == 0.0

    def test_probit_antisymmetric(self):
        """Test probit(1 - rho) = -probit(rho)."""
        for rho in (0.6, 0.9, 0.999):
            assert probit(1.0 - rho) == pytest.approx(-probit(rho), rel=1e-12)

    def test_normal_cdf_inverts_probit(self):
        """Test Phi(probit(rho)) = rho."""
        for rho in (0.05, 0.5, 0.95):
            assert normal_cdf(probit(rho)) == pytest.approx(rho, abs=1e-13)

    def test_probit_invalid_raises(self):
        """Test that rho at the boundary raises."""
        with pytest.raises(DomainError, match="probit"):
            probit(0.0)


class TestBinomial:
    """Tests for binomial tails."""

    @pytest.mark.parametrize("n,p,m", [(10, 0.3, 2), (50, 0.999, 45), (400, 0.5, 210), (1000, 0.999, 990)])
    def test_matches_scipy(self, n: int, p: float, m: int):
        """Test both tails against scipy.stats.binom."""
        cdf, sf = binom_tails(n, p, m)
        assert cdf == pytest.approx(stats.binom.cdf(m, n, p), rel=1e-10, abs=1e-300)
        assert sf == pytest.approx(stats.binom.sf(m, n, p), rel=1e-10, abs=1e-300)

    def test_small_tail_precision(self):
        """Test that a tiny lower tail is not lost to cancellation."""
        cdf = binom_cdf(500, 0.999, 490)
        assert 0.0 < cdf < 1e-9
        assert cdf == pytest.approx(stats.binom.cdf(490, 500, 0.999), rel=1e-8)

    def test_edges(self):
        """Test thresholds outside the support."""
        assert binom_tails(10, 0.5, -1) == (0.0, 1.0)
        assert binom_tails(10, 0.5, 10) == (1.0, 0.0)


class TestNegativeBinomial:
    """Tests for the attempt-count distribution."""

    def test_matches_scipy(self):
        """Test nbinom_cdf against scipy (scipy counts failures, not attempts)."""
        for n, eps in [(1, 0.5), (5, 0.1), (40, 0.001), (8, 0.9)]:
            for k in range(n, n + 30):
                expected = stats.nbinom.cdf(k - n, n, 1.0 - eps)
                assert nbinom_cdf(n, eps, k) == pytest.approx(expected, rel=1e-10, abs=1e-15)

    def test_below_support(self):
        """Test that fewer attempts than packets give probability 0."""
        assert nbinom_cdf(5, 0.1, 4) == 0.0

    def test_known_value(self):
        """Test a hand-computed value."""
        assert nbinom_cdf(3, 0.5, 4) == pytest.approx(0.3125, rel=1e-14)

    def test_quantile_is_smallest(self):
        """Test that the quantile is the smallest k reaching rho."""
        for n, eps, rho in [(1, 0.5, 0.9), (400, 0.001, 0.99), (50, 0.1, 0.5), (7, 0.3, 0.999)]:
            k = nbinom_quantile(n, eps, rho)
            assert nbinom_cdf(n, eps, k) >= rho
            assert k == n or nbinom_cdf(n, eps, k - 1) < rho

    def test_quantile_without_loss(self):
        """Test that eps = 0 needs exactly N attempts."""
        assert nbinom_quantile(12, 0.0, 0.999) == 12

    def test_invalid_raises(self):
        """Test domain errors."""
        with pytest.raises(DomainError, match="integer N"):
            nbinom_cdf(0, 0.1, 3)
        with pytest.raises(DomainError, match="eps"):
            nbinom_cdf(2, 1.0, 3)
