"""Special functions used by the charging-time and AF outage formulas.

Only what the analysis needs is provided: the regularized upper incomplete
gamma function for integer shapes, the modified Bessel function of the second
kind of order one, and log-factorials.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "log_factorial",
    "regularized_gamma_q",
    "regularized_gamma_p",
    "bessel_k1",
    "bessel_k1e",
    "log_bessel_k1",
]

# K1 switches from the power series to Temme's continued fraction here.
K1_CROSSOVER = 2.0

_LOG_FACT = np.array([math.log(math.factorial(n)) for n in range(171)])


@dataclass(frozen=True)
class Tolerance:
    """Truncation policy shared by every infinite sum in the package."""

    rel_eps: float = 1e-12
    max_terms: int = 1_000_000

    def __post_init__(self):
        if not self.rel_eps > 0:
            raise ValueError("rel_eps must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_TOL = Tolerance()


def log_factorial(n):
    """ln(n!) from an exact table up to 170, ``lgamma`` above."""
    n = int(n)
    if n < 0:
        raise DomainError(f"log_factorial needs n >= 0, got {n}")
    if n <= 170:
        return float(_LOG_FACT[n])
    return math.lgamma(n + 1.0)


def _log_factorial_array(n):
    n = np.asarray(n)
    out = np.empty(n.shape, dtype=float)
    small = n <= 170
    out[small] = _LOG_FACT[n[small]]
    if not small.all():
        from scipy.special import gammaln

        out[~small] = gammaln(n[~small] + 1.0)
    return out


def regularized_gamma_q(k, x, tol=DEFAULT_TOL):
    """Q(k, x) = Gamma(k, x) / Gamma(k) for integer k >= 1.

    Uses the finite identity ``Q(k, x) = exp(-x) * sum_{d<k} x**d / d!``.
    Terms are formed in log space and rescaled by the largest one, so the
    result is accurate even where ``exp(-x)`` alone would underflow.
    """
    if int(k) != k or k < 1:
        raise DomainError(f"shape must be a positive integer, got {k}")
    k = int(k)
    x = float(x)
    if x < 0 or math.isnan(x):
        raise DomainError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return 1.0
    if k > tol.max_terms:
        raise ConvergenceError(f"shape {k} exceeds max_terms={tol.max_terms}")
    d = np.arange(k)
    log_terms = -x + d * math.log(x) - _log_factorial_array(d)
    peak = log_terms.max()
    s = np.exp(log_terms - peak).sum()
    return float(min(1.0, math.exp(peak) * s))


def regularized_gamma_p(k, x, tol=DEFAULT_TOL):
    """Lower regularized gamma P(k, x) via its own ascending series.

    ``P(k, x) = x**k exp(-x) / k! * sum_{n>=0} x**n / ((k+1)...(k+n))``.
    This path shares no code with :func:`regularized_gamma_q` and serves as
    the complement check ``P + Q = 1``.
    """
    if int(k) != k or k < 1:
        raise DomainError(f"shape must be a positive integer, got {k}")
    k = int(k)
    x = float(x)
    if x < 0 or math.isnan(x):
        raise DomainError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return 0.0
    log_pref = -x + k * math.log(x) - log_factorial(k)
    term = 1.0
    total = 1.0
    n = 0
    while True:
        n += 1
        if n > tol.max_terms:
            raise ConvergenceError(f"lower gamma series did not converge (k={k}, x={x})")
        term *= x / (k + n)
        total += term
        if term < tol.rel_eps * total * 1e-3 and k + n > x:
            break
        if total > 1e280:
            # rescale to keep the running sum finite for very large x
            log_pref += math.log(total)
            term /= total
            total = 1.0
    return float(min(1.0, math.exp(log_pref + math.log(total))))


def _k1_series(x):
    # A&S 9.6.11 with n = 1; I1 is summed alongside.
    y = 0.25 * x * x
    term = 0.5 * x  # (x/2)^(2k+1) / (k! (k+1)!) at k = 0
    psi_a = -np.euler_gamma  # psi(k+1)
    psi_b = 1.0 - np.euler_gamma  # psi(k+2)
    i1 = 0.0
    acc = 0.0
    for k in range(200):
        i1 += term
        acc += (psi_a + psi_b) * term
        if abs(term) < 1e-17 * abs(i1):
            break
        term *= y / ((k + 1) * (k + 2))
        psi_a += 1.0 / (k + 1)
        psi_b += 1.0 / (k + 2)
    return 1.0 / x + math.log(0.5 * x) * i1 - 0.5 * acc


def _k1e_continued_fraction(x):
    # Temme/Steed CF2 for K_0 and K_1, scaled by exp(x).
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(1, 100_000):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < 1e-17:
            break
    else:
        raise ConvergenceError(f"K1 continued fraction did not converge at x={x}")
    h = a1 * h
    k0e = math.sqrt(math.pi / (2.0 * x)) / s
    return k0e * (x + 0.5 - h) / x


def bessel_k1e(x):
    """Exponentially scaled K1: ``exp(x) * K1(x)``."""
    x = float(x)
    if not x > 0:
        raise DomainError(f"K1 is defined for x > 0, got {x}")
    if x <= K1_CROSSOVER:
        return _k1_series(x) * math.exp(x)
    return _k1e_continued_fraction(x)


def bessel_k1(x):
    """Modified Bessel function of the second kind, order one."""
    x = float(x)
    if not x > 0:
        raise DomainError(f"K1 is defined for x > 0, got {x}")
    if x <= K1_CROSSOVER:
        return _k1_series(x)
    if x > 745.0:
        return 0.0
    return _k1e_continued_fraction(x) * math.exp(-x)


def log_bessel_k1(x):
    """ln K1(x), finite for every positive x."""
    return math.log(bessel_k1e(x)) - float(x)
