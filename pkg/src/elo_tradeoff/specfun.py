"""
Special-function kernel.

Log-gamma, the regularized incomplete gamma function and its inverse, the
probit function, binomial tails and the negative-binomial distribution.
Every analytic formula of the energy/latency model rests on these routines.

The incomplete gamma function follows the classic regime split: a power
series when x < s + 1 and a modified Lentz continued fraction otherwise, so
neither tail suffers from cancellation.

All functions are pure and deterministic.
"""

import math
import sys
from dataclasses import dataclass
from typing import Tuple

from elo_tradeoff.errors import ConvergenceError, DomainError

_FPMIN = sys.float_info.min / sys.float_info.epsilon
_EPS = sys.float_info.epsilon
_LOG_MAX = math.log(sys.float_info.max)
_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Tolerances:
    """Convergence controls shared by the iterative routines."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0.0:
            raise DomainError(f"abs_tol must be > 0, got {self.abs_tol!r}")
        if not self.rel_tol > 0.0:
            raise DomainError(f"rel_tol must be > 0, got {self.rel_tol!r}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter!r}")


DEFAULT_TOLERANCES = Tolerances()


def log_gamma(x: float) -> float:
    """
    Natural logarithm of the gamma function.

    Args:
        x: Positive argument

    Returns:
        ln Gamma(x)

    Raises:
        DomainError: If x <= 0 or x is not finite

    Example:
        >>> log_gamma(5.0)  # ln(4!)
        3.1780538303479458
    """
    if not (x > 0.0 and math.isfinite(x)):
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def _check_shape(s: float) -> None:
    if not (s > 0.0 and math.isfinite(s)):
        raise DomainError(f"gamma shape must be > 0, got {s!r}")


def _series_lower(s: float, x: float, tol: Tolerances) -> float:
    """P(s, x) by the power series; valid (and fast) for x < s + 1."""
    ap = s
    delta = 1.0 / s
    total = delta
    limit = tol.max_iter + int(10.0 * math.sqrt(s))
    for _ in range(limit):
        ap += 1.0
        delta *= x / ap
        total += delta
        if abs(delta) < abs(total) * _EPS:
            return total * math.exp(-x + s * math.log(x) - math.lgamma(s))
    raise ConvergenceError("incomplete gamma series did not converge", (0.0, x))


def _continued_fraction_upper(s: float, x: float, tol: Tolerances) -> float:
    """Q(s, x) by the modified Lentz continued fraction; valid for x >= s + 1."""
    b = x + 1.0 - s
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    limit = tol.max_iter + int(10.0 * math.sqrt(s))
    for i in range(1, limit + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.exp(-x + s * math.log(x) - math.lgamma(s)) * h
    raise ConvergenceError("incomplete gamma continued fraction did not converge", (x, math.inf))


def reg_lower_gamma(s: float, x: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    Regularized lower incomplete gamma function P(s, x) = gamma(s, x) / Gamma(s).

    Args:
        s: Shape, s > 0
        x: Upper integration limit, x >= 0
        tol: Iteration controls

    Returns:
        Probability in [0, 1], nondecreasing in x

    Raises:
        DomainError: If s <= 0 or x < 0

    Example:
        >>> reg_lower_gamma(1.0, 1.0)  # 1 - 1/e
        0.6321205588285577
    """
    _check_shape(s)
    if x < 0.0 or math.isnan(x):
        raise DomainError(f"reg_lower_gamma requires x >= 0, got {x!r}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < s + 1.0:
        return min(1.0, _series_lower(s, x, tol))
    return max(0.0, 1.0 - _continued_fraction_upper(s, x, tol))


def reg_upper_gamma(s: float, x: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Regularized upper incomplete gamma function Q(s, x) = 1 - P(s, x), tail-accurate."""
    _check_shape(s)
    if x < 0.0 or math.isnan(x):
        raise DomainError(f"reg_upper_gamma requires x >= 0, got {x!r}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < s + 1.0:
        return max(0.0, 1.0 - _series_lower(s, x, tol))
    return min(1.0, _continued_fraction_upper(s, x, tol))


def gamma_pdf_standard(s: float, x: float) -> float:
    """Density of Gamma(s, 1) at x; inf where it exceeds the float range."""
    if x <= 0.0:
        return 0.0
    log_pdf = (s - 1.0) * math.log(x) - x - math.lgamma(s)
    return math.inf if log_pdf > _LOG_MAX else math.exp(log_pdf)


def _log_newton_candidate(s: float, x: float, residual: float) -> float:
    """
    Newton update of x taken on ln(x).

    The derivative of P(s, e^u) in u is x times the density, which stays in
    range for small shapes whose density overflows near zero. NaN when the
    step cannot be represented.
    """
    if x <= 0.0:
        return math.nan
    log_slope = s * math.log(x) - x - math.lgamma(s)
    if log_slope < -_LOG_MAX:
        return math.nan
    step = residual / math.exp(log_slope)
    if abs(step) > _LOG_MAX:
        return math.nan
    return x * math.exp(-step)


def _initial_gamma_guess(s: float, rho: float) -> float:
    """Wilson-Hilferty guess, with the small-x power law as fallback."""
    z = probit(rho)
    w = 1.0 - 1.0 / (9.0 * s) + z / (3.0 * math.sqrt(s))
    if w > 0.0:
        guess = s * w**3
        if guess > 0.0:
            return guess
    return math.exp((math.log(rho) + math.lgamma(s + 1.0)) / s)


def gamma_quantile(
    shape: float,
    scale: float,
    rho: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """
    rho-quantile of the Gamma(shape, scale) distribution.

    Newton iteration on the regularized CDF, safeguarded by bisection inside
    the bracket [0, shape + 40*sqrt(shape) + 40] (standardized units).

    Args:
        shape: Gamma shape, > 0
        scale: Gamma scale, > 0
        rho: Probability level in (0, 1)
        tol: Iteration controls; the CDF residual is driven below abs_tol

    Returns:
        t >= 0 with P(shape, t/scale) = rho

    Raises:
        DomainError: On invalid arguments
        ConvergenceError: If max_iter is exhausted (carries the last bracket)

    Example:
        >>> gamma_quantile(1.0, 2.0, 0.5)  # -2 ln(0.5)
        1.3862943611198906
    """
    _check_shape(shape)
    if not (scale > 0.0 and math.isfinite(scale)):
        raise DomainError(f"gamma scale must be > 0, got {scale!r}")
    if not 0.0 < rho < 1.0:
        raise DomainError(f"gamma_quantile requires rho in (0, 1), got {rho!r}")

    lo = 0.0
    hi = shape + 40.0 * math.sqrt(shape) + 40.0
    while reg_lower_gamma(shape, hi, tol) < rho:
        # only reachable for rho extremely close to 1
        lo, hi = hi, 2.0 * hi

    guess = _initial_gamma_guess(shape, rho)
    if guess == 0.0:
        # small-shape quantile below the smallest subnormal
        return 0.0
    x = min(max(guess, lo), hi)
    if not lo < x < hi:
        x = 0.5 * (lo + hi)

    for _ in range(tol.max_iter):
        residual = reg_lower_gamma(shape, x, tol) - rho
        if residual < 0.0:
            lo = x
        else:
            hi = x
        pdf = gamma_pdf_standard(shape, x)
        converged = abs(residual) <= tol.abs_tol
        if 0.0 < pdf < math.inf:
            candidate = x - residual / pdf
        else:
            candidate = math.nan
        if not lo <= candidate <= hi:
            candidate = _log_newton_candidate(shape, x, residual)
        if converged:
            if lo <= candidate <= hi:
                x = candidate
            return x * scale
        if lo < candidate < hi and candidate != x:
            x = candidate
        elif lo > 0.0:
            x = math.sqrt(lo) * math.sqrt(hi)
        else:
            x = 0.5 * (lo + hi)
        if hi - lo <= 4.0 * _EPS * hi:
            return x * scale

    raise ConvergenceError("gamma_quantile did not converge", (lo * scale, hi * scale))


def normal_cdf(z: float) -> float:
    """Standard normal CDF, accurate in both tails."""
    return 0.5 * math.erfc(-z / _SQRT2)


# Rational approximation coefficients for the inverse normal CDF.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _probit_rational(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    q = p - 0.5
    r = q * q
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
        ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    )


def probit(rho: float) -> float:
    """
    Inverse standard normal CDF.

    A rational approximation (relative error ~1e-9) refined by one Halley
    step on the normal CDF. The upper half is computed by reflection, which
    makes the function exactly antisymmetric there.

    Args:
        rho: Probability in (0, 1)

    Returns:
        z with Phi(z) = rho

    Raises:
        DomainError: If rho is not strictly between 0 and 1

    Example:
        >>> round(probit(0.975), 10)
        1.9599639845
    """
    if not 0.0 < rho < 1.0:
        raise DomainError(f"probit requires rho in (0, 1), got {rho!r}")
    if rho == 0.5:
        return 0.0
    if rho > 0.5:
        return -probit(1.0 - rho)
    x = _probit_rational(rho)
    e = normal_cdf(x) - rho
    u = e * _SQRT2PI * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def _log_binom_term(n: int, h: int, log_p: float, log_q: float) -> float:
    return math.log(math.comb(n, h)) + h * log_p + (n - h) * log_q


def binom_tails(n: int, p: float, m: int) -> Tuple[float, float]:
    """
    Both tails of a Binomial(n, p) distribution at m.

    The smaller tail is summed directly from log-domain pmf terms and the
    other one is obtained as its complement, so the small tail keeps full
    relative precision.

    Args:
        n: Number of trials, >= 0
        p: Success probability in [0, 1]
        m: Threshold

    Returns:
        (Pr[X <= m], Pr[X > m])
    """
    if n < 0:
        raise DomainError(f"binomial trial count must be >= 0, got {n!r}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"binomial probability must be in [0, 1], got {p!r}")
    if m < 0:
        return 0.0, 1.0
    if m >= n:
        return 1.0, 0.0
    if p == 0.0:
        return 1.0, 0.0
    if p == 1.0:
        return 0.0, 1.0

    log_p = math.log(p)
    log_q = math.log1p(-p)
    if m < n * p:
        lower = math.fsum(math.exp(_log_binom_term(n, h, log_p, log_q)) for h in range(m + 1))
        lower = min(1.0, lower)
        return lower, 1.0 - lower
    upper = math.fsum(math.exp(_log_binom_term(n, h, log_p, log_q)) for h in range(m + 1, n + 1))
    upper = min(1.0, upper)
    return 1.0 - upper, upper


def binom_cdf(n: int, p: float, m: int) -> float:
    """Pr[Binomial(n, p) <= m]."""
    return binom_tails(n, p, m)[0]


def _check_nbinom(N: int, eps: float) -> None:
    if int(N) != N or N < 1:
        raise DomainError(f"negative binomial needs an integer N >= 1, got {N!r}")
    if not 0.0 <= eps < 1.0:
        raise DomainError(f"negative binomial needs eps in [0, 1), got {eps!r}")


def nbinom_cdf(N: int, eps: float, k: int) -> float:
    """
    CDF of the number of attempts needed for N successes.

    Each attempt succeeds independently with probability 1 - eps. Uses the
    identity Pr[N_tx <= k] = Pr[Binomial(k, 1 - eps) >= N].

    Args:
        N: Required successes, integer >= 1
        eps: Per-attempt failure probability in [0, 1)
        k: Attempt budget

    Returns:
        Pr[N_tx <= k]; 0 when k < N

    Example:
        >>> nbinom_cdf(3, 0.5, 4)
        0.3125
    """
    _check_nbinom(N, eps)
    if k < N:
        return 0.0
    return binom_tails(int(k), 1.0 - eps, int(N) - 1)[1]


def nbinom_quantile(N: int, eps: float, rho: float) -> int:
    """
    Smallest attempt count k with nbinom_cdf(N, eps, k) >= rho.

    Args:
        N: Required successes, integer >= 1
        eps: Per-attempt failure probability in [0, 1)
        rho: Probability level in (0, 1)

    Returns:
        Integer quantile k >= N

    Example:
        >>> nbinom_quantile(1, 0.5, 0.9)
        4
    """
    _check_nbinom(N, eps)
    if not 0.0 < rho < 1.0:
        raise DomainError(f"nbinom_quantile requires rho in (0, 1), got {rho!r}")
    N = int(N)
    if eps == 0.0:
        return N

    mean = N / (1.0 - eps)
    std = math.sqrt(N * eps) / (1.0 - eps)
    hi = max(N, int(math.ceil(mean + max(probit(rho), 0.0) * std)))
    while nbinom_cdf(N, eps, hi) < rho:
        hi = N + 2 * (hi - N) + 1
    lo = N - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if nbinom_cdf(N, eps, mid) >= rho:
            hi = mid
        else:
            lo = mid
    return hi
