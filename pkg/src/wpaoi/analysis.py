"""Closed-form age metrics for the direct, DF and AF schemes.

Time is counted in slots. A delivery in slot ``n`` of an update generated in
slot ``u`` sets the destination age to ``n + 1 - u`` at the start of slot
``n + 1``. Under that convention the one-hop average AoI is
``(E[X^2] / E[X] + 1) / 2`` and the peak AoI is ``E[X]``, where ``X`` is the
time between successful deliveries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Optional

from .charging import AfWaitDist, ChargeTimeDist, af_wait_moments, charge_moments
from .errors import DivideByZeroProb, DomainError, UnstableQueue
from .specfun import DEFAULT_TOL, Tolerance
from .system import DerivedParams

__all__ = [
    "CycleMoments",
    "SpecialCaseSpec",
    "PaoiResult",
    "SchemeAnalysis",
    "cycle_moments",
    "geometric_moments",
    "paoi_onehop",
    "aoi_onehop",
    "kingman_waiting_upper",
    "paoi_df_upper",
    "waiting_exact",
    "waiting_slotted",
    "special_case",
    "table1_general",
    "all_special_cases",
    "af_special_case",
    "aoi_df_hybrid",
    "source_cycle",
    "relay_cycle",
    "direct_cycle",
    "af_cycle",
    "analyze_scheme",
]

# relative slack for the variance check, absorbs rounding in second - mean**2
_VAR_SLACK = 1e-12


@dataclass(frozen=True)
class CycleMoments:
    """First two moments of the slots between successful deliveries on a link."""

    mean: float
    second: float

    def __post_init__(self):
        if not self.mean >= 1.0 - 1e-12:
            raise DomainError(f"cycle mean must be >= 1, got {self.mean}")
        if self.second < self.mean ** 2 * (1.0 - _VAR_SLACK):
            raise DomainError(f"second moment {self.second} below mean^2 {self.mean ** 2}")

    @property
    def variance(self):
        return max(0.0, self.second - self.mean ** 2)


def cycle_moments(t_mean, t_second, p_suc) -> CycleMoments:
    """Moments of a geometric number of i.i.d. charging cycles.

    ``E[X] = E[T]/p`` and ``E[X^2] = E[T^2]/p + 2 E[T]^2 (1 - p) / p^2``.
    """
    if p_suc <= 0:
        raise DivideByZeroProb("success probability is zero")
    if p_suc > 1:
        raise DomainError(f"success probability above one: {p_suc}")
    mean = t_mean / p_suc
    second = t_second / p_suc + 2.0 * t_mean ** 2 * (1.0 - p_suc) / p_suc ** 2
    return CycleMoments(mean, second)


def geometric_moments(p) -> CycleMoments:
    """Cycle moments with one-slot charging, i.e. a Geometric(p) on {1, 2, ...}."""
    return cycle_moments(1.0, 1.0, p)


def paoi_onehop(x: CycleMoments) -> float:
    return x.mean


def aoi_onehop(x: CycleMoments) -> float:
    return 0.5 * (x.second / x.mean + 1.0)


def kingman_waiting_upper(xs: CycleMoments, xr: CycleMoments) -> float:
    """Kingman's bound on the mean relay-queue waiting time.

    ``(var X_s + var X_r) / (2 (E[X_s] - E[X_r]))``; requires ``E[X_r] < E[X_s]``.
    """
    if not xr.mean < xs.mean:
        raise UnstableQueue(f"E[X_r]={xr.mean} >= E[X_s]={xs.mean}")
    return (xs.variance + xr.variance) / (2.0 * (xs.mean - xr.mean))


@dataclass(frozen=True)
class PaoiResult:
    """Average peak AoI of a DF configuration, or an instability marker.

    ``value`` is ``None`` when the relay queue is unstable. ``exact_value`` is
    filled in only where a closed-form mean waiting time is known
    (Geo/Geo/1 and Geo/G/1).
    """

    value: Optional[float]
    queue_label: str
    stability_utilization: float
    bound_kind: str
    exact_value: Optional[float] = None

    @property
    def stable(self):
        return self.value is not None


def paoi_df_upper(xs: CycleMoments, xr: CycleMoments) -> PaoiResult:
    """Upper bound E[X_s] + E[X_r] + Kingman(W) on the DF peak AoI."""
    w = kingman_waiting_upper(xs, xr)
    return PaoiResult(
        value=xs.mean + xr.mean + w,
        queue_label="G/G/1",
        stability_utilization=xr.mean / xs.mean,
        bound_kind="kingman_upper_bound",
    )


def waiting_exact(kind, p_s, xr: CycleMoments) -> float:
    """Closed-form mean waiting time for the two queues where one is tabulated.

    ``geo_geo``: ``p_s (1 - p_s) / (p_r (p_r - p_s))`` with ``p_r = 1/E[X_r]``.
    ``geo_g``: ``E[X_r^2] / (2 (1/p_s - E[X_r]))``.

    In the slotted relay model the ``geo_geo`` value counts the arrival slot
    as a waiting slot whenever the relay is busy in it; it exceeds the
    waiting time in :func:`waiting_slotted` by exactly ``rho = p_s / p_r``.
    """
    if not 0 < p_s <= 1:
        raise DomainError(f"p_s must lie in (0, 1], got {p_s}")
    if kind == "geo_geo":
        p_r = 1.0 / xr.mean
        if not p_s < p_r:
            raise UnstableQueue(f"Geo/Geo/1 needs p_s < p_r, got {p_s} >= {p_r}")
        return p_s * (1.0 - p_s) / (p_r * (p_r - p_s))
    if kind == "geo_g":
        if not xr.mean < 1.0 / p_s:
            raise UnstableQueue(f"Geo/G/1 needs E[X_r] < 1/p_s, got {xr.mean} >= {1.0 / p_s}")
        return xr.second / (2.0 * (1.0 / p_s - xr.mean))
    raise ValueError(f"unknown queue kind {kind!r}")


def waiting_slotted(p_s, xr: CycleMoments) -> float:
    """Exact mean wait of the slotted relay queue under Bernoulli(p_s) arrivals.

    A packet decoded in slot ``u`` can start service in slot ``u + 1``; the
    wait is the number of slots in between. With i.i.d. service times this
    is ``p_s E[S(S-1)] / (2 (1 - p_s E[S]))``.
    """
    rho = p_s * xr.mean
    if not rho < 1:
        raise UnstableQueue(f"utilization {rho} >= 1")
    return p_s * (xr.second - xr.mean) / (2.0 * (1.0 - rho))


# ------------------------------------------------------- special cases


_LETTER = {
    ("full", "deterministic"): "D",
    ("full", "random"): "Geo",
    ("charging", "deterministic"): "P",
    ("charging", "random"): "G",
}


@dataclass(frozen=True)
class SpecialCaseSpec:
    source_capacitor: str
    source_success: str
    relay_capacitor: str
    relay_success: str

    def __post_init__(self):
        for cap, suc in ((self.source_capacitor, self.source_success), (self.relay_capacitor, self.relay_success)):
            if (cap, suc) not in _LETTER:
                raise ValueError(f"unknown capacitor/success combination {(cap, suc)}")

    @property
    def arrival(self):
        return _LETTER[(self.source_capacitor, self.source_success)]

    @property
    def service(self):
        return _LETTER[(self.relay_capacitor, self.relay_success)]

    @property
    def queue_label(self):
        return f"{self.arrival}/{self.service}/1"


def all_special_cases():
    """The 16 DF rows in table order (source varies slowest)."""
    order = [("full", "deterministic"), ("full", "random"), ("charging", "deterministic"), ("charging", "random")]
    return [SpecialCaseSpec(a[0], a[1], b[0], b[1]) for a, b in product(order, order)]


NEVER_STABLE = frozenset({"D/Geo/1", "D/P/1", "D/G/1"})
ALWAYS_STABLE = frozenset({"D/D/1", "Geo/D/1", "P/D/1", "G/D/1"})


def source_cycle(bprime_s, p_s) -> CycleMoments:
    return cycle_moments(*charge_moments(ChargeTimeDist(bprime_s)), p_s)


def relay_cycle(bprime_r, p_r) -> CycleMoments:
    return cycle_moments(*charge_moments(ChargeTimeDist(bprime_r)), p_r)


def _row_inputs(spec: SpecialCaseSpec, params: DerivedParams):
    bs = params.bprime_s if spec.source_capacitor == "charging" else 0.0
    br = params.bprime_r if spec.relay_capacitor == "charging" else 0.0
    ps = params.p_suc_s if spec.source_success == "random" else 1.0
    pr = params.p_suc_r if spec.relay_success == "random" else 1.0
    return bs, br, ps, pr


def _table_value(label, bs, br, ps, pr, xs, xr):
    # closed forms row by row; the G/D/1 numerator uses var(X_s) alone
    if label == "D/D/1":
        return 2.0
    if label == "Geo/D/1":
        return 3.0 / (2.0 * ps) + 1.0
    if label == "Geo/Geo/1":
        return (pr ** 2 * (3.0 - ps) - ps ** 2 * (1.0 + pr)) / (2.0 * ps * pr * (pr - ps))
    if label == "Geo/P/1":
        return 1.0 / ps + (1.0 + br) + ((1.0 - ps) / ps ** 2 + br) / (2.0 * (1.0 / ps - (1.0 + br)))
    if label == "Geo/G/1":
        return 1.0 / ps + xr.mean + ((1.0 - ps) / ps ** 2 + xr.second - xr.mean ** 2) / (2.0 * (1.0 / ps - xr.mean))
    if label == "P/D/1":
        return 2.5 + bs
    if label == "P/Geo/1":
        return (1.0 + bs) + 1.0 / pr + (bs + (1.0 - pr) / pr ** 2) / (2.0 * ((1.0 + bs) - 1.0 / pr))
    if label == "P/P/1":
        return (bs * (5.0 + 2.0 * bs) - br * (3.0 + 2.0 * br)) / (2.0 * (bs - br))
    if label == "P/G/1":
        return (1.0 + bs) + xr.mean + (bs + xr.second - xr.mean ** 2) / (2.0 * ((1.0 + bs) - xr.mean))
    if label == "G/D/1":
        return xs.mean + 1.0 + (xs.second - xs.mean ** 2) / (2.0 * (xs.mean - 1.0))
    if label == "G/Geo/1":
        return xs.mean + 1.0 / pr + (xs.second - xs.mean ** 2 + (1.0 - pr) / pr ** 2) / (2.0 * (xs.mean - 1.0 / pr))
    if label == "G/P/1":
        return xs.mean + (1.0 + br) + (xs.second - xs.mean ** 2 + br) / (2.0 * (xs.mean - (1.0 + br)))
    if label == "G/G/1":
        return xs.mean + xr.mean + (xs.second + xr.second - (xs.mean ** 2 + xr.mean ** 2)) / (2.0 * (xs.mean - xr.mean))
    raise AssertionError(label)


def _table_stable(label, bs, br, ps, pr, xs, xr):
    conditions = {
        "D/D/1": True,
        "Geo/D/1": ps < 1.0,
        "Geo/Geo/1": ps < pr,
        "Geo/P/1": 1.0 + br < 1.0 / ps,
        "Geo/G/1": xr.mean < 1.0 / ps,
        "P/D/1": bs > 0.0,
        "P/Geo/1": 1.0 / pr < 1.0 + bs,
        "P/P/1": br < bs,
        "P/G/1": xr.mean < 1.0 + bs,
        "G/D/1": xs.mean > 1.0,
        "G/Geo/1": 1.0 / pr < xs.mean,
        "G/P/1": 1.0 + br < xs.mean,
        "G/G/1": xr.mean < xs.mean,
    }
    if label in NEVER_STABLE:
        return False
    return conditions[label]


def special_case(spec: SpecialCaseSpec, params: DerivedParams) -> PaoiResult:
    """Evaluate one DF special case: queue type, stability, closed-form PAoI.

    Instability is reported through ``value=None`` rather than an exception.
    """
    label = spec.queue_label
    bs, br, ps, pr = _row_inputs(spec, params)
    xs = source_cycle(bs, ps)
    xr = relay_cycle(br, pr)
    rho = xr.mean / xs.mean
    kind = "exact" if label == "D/D/1" else "kingman_upper_bound"
    if not _table_stable(label, bs, br, ps, pr, xs, xr):
        return PaoiResult(None, label, rho, kind)
    exact = None
    if label == "Geo/Geo/1":
        exact = xs.mean + xr.mean + waiting_exact("geo_geo", ps, xr)
    elif label == "Geo/G/1":
        exact = xs.mean + xr.mean + waiting_exact("geo_g", ps, xr)
    return PaoiResult(_table_value(label, bs, br, ps, pr, xs, xr), label, rho, kind, exact)


def table1_general(spec: SpecialCaseSpec, params: DerivedParams) -> float:
    """The general Kingman bound evaluated with the row's degenerate moments.

    Zero-variance equal-mean queues (D/D/1) get a zero waiting time.
    """
    bs, br, ps, pr = _row_inputs(spec, params)
    xs = source_cycle(bs, ps)
    xr = relay_cycle(br, pr)
    if xs.variance == 0 and xr.variance == 0 and xs.mean == xr.mean:
        return xs.mean + xr.mean
    return paoi_df_upper(xs, xr).value


def af_special_case(capacitors_full, success_deterministic, params: DerivedParams, tol: Tolerance = DEFAULT_TOL):
    """AF peak AoI in the four capacitor/success regimes."""
    if capacitors_full:
        return 1.0 if success_deterministic else 1.0 / params.p_suc_af
    t_mean, t_second = af_wait_moments(AfWaitDist(params.bprime_s, params.bprime_r), tol)
    p = 1.0 if success_deterministic else params.p_suc_af
    return paoi_onehop(cycle_moments(t_mean, t_second, p))


def aoi_df_hybrid(xs: CycleMoments, xr: CycleMoments, e_xs_w, slotted=True) -> float:
    """DF average AoI given an externally estimated E[X_s W].

    ``(E[X_s^2]/2 + E[X_s] E[X_r] + E[X_s W]) / E[X_s]``, plus ``1/2`` when
    ``slotted`` (the area under a unit-step staircase exceeds the triangle by
    half a slot per slot, as in the one-hop formula).
    """
    value = (0.5 * xs.second + xs.mean * xr.mean + e_xs_w) / xs.mean
    return value + 0.5 if slotted else value


# ---------------------------------------------------------- whole schemes


def direct_cycle(params: DerivedParams) -> CycleMoments:
    return source_cycle(params.bprime_s, params.p_suc_direct)


def af_cycle(params: DerivedParams, tol: Tolerance = DEFAULT_TOL) -> CycleMoments:
    t_mean, t_second = af_wait_moments(AfWaitDist(params.bprime_s, params.bprime_r), tol)
    return cycle_moments(t_mean, t_second, params.p_suc_af)


@dataclass(frozen=True)
class SchemeAnalysis:
    """Analytic metrics of one scheme.

    For DF, ``paoi`` is the Kingman upper bound (``None`` if the relay queue is
    unstable) and ``aoi`` is ``None``: the DF average AoI needs E[X_s W].
    """

    scheme: str
    paoi: Optional[float]
    paoi_kind: str
    aoi: Optional[float]
    x: CycleMoments
    xr: Optional[CycleMoments] = None

    @property
    def stable(self):
        return self.paoi is not None


def analyze_scheme(params: DerivedParams, scheme, tol: Tolerance = DEFAULT_TOL) -> SchemeAnalysis:
    if scheme == "direct":
        x = direct_cycle(params)
        return SchemeAnalysis("direct", paoi_onehop(x), "exact", aoi_onehop(x), x)
    if scheme == "af":
        x = af_cycle(params, tol)
        return SchemeAnalysis("af", paoi_onehop(x), "exact", aoi_onehop(x), x)
    if scheme == "df":
        if math.isnan(params.p_suc_r):
            raise UnstableQueue("relay has no transmit energy left after processing cost")
        xs = source_cycle(params.bprime_s, params.p_suc_s)
        xr = relay_cycle(params.bprime_r, params.p_suc_r)
        try:
            paoi = paoi_df_upper(xs, xr).value
        except UnstableQueue:
            paoi = None
        return SchemeAnalysis("df", paoi, "bound", None, xs, xr)
    raise ValueError(f"unknown scheme {scheme!r}")
