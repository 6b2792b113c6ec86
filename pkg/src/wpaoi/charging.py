"""Capacitor charging-time laws.

A node whose capacitor needs ``B'`` units of normalized energy, harvesting an
i.i.d. Exp(1) amount per slot, fires in the first slot ``m`` where the running
harvest reaches ``B'``. That slot count is ``1 + Poisson(B')``. The AF relay
pair waits for both capacitors, ``max(T_s, T_r)``, whose CDF is the product
of the two marginal CDFs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError, DomainError
from .specfun import DEFAULT_TOL, Tolerance, _log_factorial_array, log_factorial, regularized_gamma_q

__all__ = [
    "ChargeTimeDist",
    "AfWaitDist",
    "charge_pmf",
    "charge_cdf",
    "charge_moments",
    "charge_pmf_array",
    "charge_sf_array",
    "af_wait_cdf",
    "af_wait_pmf",
    "af_wait_pmf_three_term",
    "af_wait_moments",
    "af_wait_second_moment_as_printed",
    "sample_charge_time",
    "sample_af_wait",
    "support_bound",
]


def _check_bprime(name, v):
    v = float(v)
    if not v >= 0 or math.isinf(v):
        raise DomainError(f"{name} must be finite and >= 0, got {v}")
    return v


@dataclass(frozen=True)
class ChargeTimeDist:
    """Slots needed to fill one capacitor of normalized size ``bprime``."""

    bprime: float

    def __post_init__(self):
        object.__setattr__(self, "bprime", _check_bprime("bprime", self.bprime))


@dataclass(frozen=True)
class AfWaitDist:
    """Slots until both the source and relay capacitors are full."""

    bprime_s: float
    bprime_r: float

    def __post_init__(self):
        object.__setattr__(self, "bprime_s", _check_bprime("bprime_s", self.bprime_s))
        object.__setattr__(self, "bprime_r", _check_bprime("bprime_r", self.bprime_r))

    @property
    def marginals(self):
        return ChargeTimeDist(self.bprime_s), ChargeTimeDist(self.bprime_r)


def support_bound(bprime):
    """Slot count beyond which the charging p.m.f. tail is below 1e-10."""
    return int(math.ceil(bprime + 50.0 * math.sqrt(bprime + 1.0)))


def _check_slot(m):
    if int(m) != m or m < 1:
        raise DomainError(f"slot index must be a positive integer, got {m}")
    return int(m)


def charge_pmf(dist: ChargeTimeDist, m) -> float:
    """P(T = m) = B'^(m-1) exp(-B') / (m-1)!."""
    m = _check_slot(m)
    b = dist.bprime
    if b == 0.0:
        return 1.0 if m == 1 else 0.0
    return math.exp((m - 1) * math.log(b) - b - log_factorial(m - 1))


def charge_cdf(dist: ChargeTimeDist, k) -> float:
    return regularized_gamma_q(_check_slot(k), dist.bprime)


def charge_moments(dist: ChargeTimeDist):
    """(E[T], E[T^2]) = (1 + B', 1 + 3B' + B'^2)."""
    b = dist.bprime
    return 1.0 + b, 1.0 + 3.0 * b + b * b


def charge_pmf_array(dist: ChargeTimeDist, m_max) -> np.ndarray:
    """P(T = m) for m = 1..m_max (index 0 holds m = 1)."""
    m = np.arange(1, int(m_max) + 1)
    b = dist.bprime
    if b == 0.0:
        out = np.zeros(m.size)
        out[0] = 1.0
        return out
    return np.exp((m - 1) * math.log(b) - b - _log_factorial_array(m - 1))


def charge_sf_array(dist: ChargeTimeDist, m_max) -> np.ndarray:
    """P(T > i) for i = 0..m_max, summed from the far tail inwards.

    Summing the tail directly keeps the small survival probabilities accurate
    instead of forming ``1 - CDF``.
    """
    pmf = charge_pmf_array(dist, m_max)
    sf = np.zeros(int(m_max) + 1)
    sf[:-1] = np.cumsum(pmf[::-1])[::-1]
    return sf


def af_wait_cdf(dist: AfWaitDist, k) -> float:
    k = _check_slot(k)
    return regularized_gamma_q(k, dist.bprime_s) * regularized_gamma_q(k, dist.bprime_r)


def af_wait_pmf(dist: AfWaitDist, m) -> float:
    """P(max(T_s, T_r) = m) by differencing the product CDF."""
    m = _check_slot(m)
    upper = af_wait_cdf(dist, m)
    lower = af_wait_cdf(dist, m - 1) if m > 1 else 0.0
    return upper - lower


def af_wait_pmf_three_term(dist: AfWaitDist, m) -> float:
    """Same p.m.f. from the three disjoint events (both at m, or one at m and the other earlier)."""
    m = _check_slot(m)
    s, r = dist.marginals
    ps, pr = charge_pmf(s, m), charge_pmf(r, m)
    fs = charge_cdf(s, m - 1) if m > 1 else 0.0
    fr = charge_cdf(r, m - 1) if m > 1 else 0.0
    return ps * pr + pr * fs + ps * fr


def _af_tail_terms(dist: AfWaitDist, tol: Tolerance):
    """1 - F(i) for i = 1..n, with n chosen by the truncation rule."""
    lead = max(dist.bprime_s, dist.bprime_r)
    n = max(support_bound(dist.bprime_s), support_bound(dist.bprime_r)) + 16
    while True:
        if n > tol.max_terms:
            raise ConvergenceError(f"AF wait moments need more than {tol.max_terms} terms")
        s, r = dist.marginals
        ss = charge_sf_array(s, n)[1:]
        sr = charge_sf_array(r, n)[1:]
        tail = ss + sr - ss * sr
        i = np.arange(1, n + 1)
        partial = 1.0 + np.cumsum(tail)
        done = (tail < tol.rel_eps * partial) & (i > lead + 10)
        hit = np.flatnonzero(done)
        if hit.size:
            stop = hit[0] + 1
            return i[:stop], tail[:stop]
        n *= 2


def af_wait_moments(dist: AfWaitDist, tol: Tolerance = DEFAULT_TOL):
    """(E[T_AF], E[T_AF^2]) from the tail sums of the product CDF.

    ``E[T] = sum_{i>=0} (1 - F(i))`` and ``E[T^2] = sum_{i>=0} (2i + 1)(1 - F(i))``,
    where F(0) = 0 so the ``i = 0`` term contributes 1 to each.
    """
    i, tail = _af_tail_terms(dist, tol)
    mean = 1.0 + tail.sum()
    second = 1.0 + ((2 * i + 1) * tail).sum()
    return float(mean), float(second)


def af_wait_second_moment_as_printed(dist: AfWaitDist, tol: Tolerance = DEFAULT_TOL):
    """``2 * sum_{i>=1} i (1 - F(i))``, which equals E[T^2] - E[T].

    Kept so the discrepancy with :func:`af_wait_moments` can be demonstrated.
    """
    i, tail = _af_tail_terms(dist, tol)
    return float(2.0 * (i * tail).sum())


@njit(cache=True)
def _accumulate_slots(rng, bprime, n):
    out = np.empty(n, dtype=np.int64)
    for j in range(n):
        energy = rng.standard_exponential()
        m = 1
        while energy < bprime:
            energy += rng.standard_exponential()
            m += 1
        out[j] = m
    return out


def sample_charge_time(dist: ChargeTimeDist, rng: np.random.Generator, size=None, fast=False):
    """Draw charging times.

    By default each draw accumulates per-slot Exp(1) harvests until the
    capacitor is full. ``fast=True`` draws ``1 + Poisson(B')`` instead, which
    has the same law but different stream consumption.
    """
    n = 1 if size is None else int(size)
    if fast:
        out = 1 + rng.poisson(dist.bprime, n).astype(np.int64)
    else:
        out = _accumulate_slots(rng, dist.bprime, n)
    return int(out[0]) if size is None else out


def sample_af_wait(dist: AfWaitDist, rng: np.random.Generator, size=None, fast=False):
    s, r = dist.marginals
    n = 1 if size is None else int(size)
    ts = sample_charge_time(s, rng, n, fast)
    tr = sample_charge_time(r, rng, n, fast)
    out = np.maximum(ts, tr)
    return int(out[0]) if size is None else out
