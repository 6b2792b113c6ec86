"""Slot-level Monte Carlo of the direct, DF and AF schemes.

Slot conventions (shared with :mod:`wpaoi.analysis`):

* Every node harvests an independent Exp(1) normalized amount per slot. A
  capacitor that empties in slot ``a`` is full again in slot ``a + T``,
  ``T`` being the first slot count whose running harvest reaches ``B'``.
  A node transmits in the slot its capacitor fills, using all of it.
* The destination age starts at 1 in slot 1. A delivery in slot ``n`` of an
  update stamped ``u`` (its source transmission slot) sets the age to
  ``n + 1 - u`` in slot ``n + 1``; otherwise the age grows by one per slot.
  The peak AoI sample is the age in the delivery slot.
* DF: a packet decoded in slot ``u`` joins the relay FIFO and can start
  service in slot ``u + 1``. Without energy banking, each service starts with
  an empty relay capacitor, so service times are i.i.d. recharge cycles. With
  banking the relay keeps (at most ``B'_r``) energy while idle.
* AF: an attempt happens in the first slot in which both capacitors are full.

The loops advance cycle by cycle but draw the same per-slot harvests a
slot-by-slot loop would, so the sample paths have the same law.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from numba import njit

from . import analysis as an
from .errors import Diverged, InvalidParam
from .streams import split_stream
from .system import DerivedParams, SystemParams, derive, validate

__all__ = [
    "SimConfig",
    "AgeStats",
    "ReplicationResult",
    "run",
    "run_replication",
    "simulate_geo_geo_queue",
    "validate_against_analysis",
    "ComparisonRow",
    "with_overrides",
    "aggregate",
]

SCHEMES = ("direct", "df", "af")

# success-draw modes
_BERNOULLI, _PHYSICAL_HOP, _PHYSICAL_AF = 0, 1, 2

# layout of the per-replication accumulator vector
_N_ACC = 28
(
    I_DELIV, I_AREA, I_WINDOW, I_PEAK, I_PEAK2, I_X, I_X2,
    I_ATT1, I_SUC1, I_ATT2, I_SUC2,
    I_T1, I_NT1, I_T2, I_NT2, I_T3, I_NT3,
    I_XS, I_XS2, I_XR, I_XR2, I_W, I_XSW, I_Y, I_NPKT,
    I_DIVERGED, I_SLOTS, I_ALL_DELIV,
) = range(_N_ACC)


@njit(cache=True)
def _charge(rng, bprime, fast):
    if fast:
        return 1 + rng.poisson(bprime)
    energy = rng.standard_exponential()
    m = 1
    while energy < bprime:
        energy += rng.standard_exponential()
        m += 1
    return m


@njit(cache=True)
def _succeed(rng, mode, p, snr1, snr2, gamma_th):
    if mode == _BERNOULLI:
        return rng.random() < p
    g1 = snr1 * rng.standard_exponential()
    if mode == _PHYSICAL_HOP:
        return g1 >= gamma_th
    g2 = snr2 * rng.standard_exponential()
    return g1 * g2 / (g1 + g2 + 1.0) >= gamma_th


@njit(cache=True)
def _onehop_kernel(rng, two_nodes, bps, bpr, mode, p, snr1, snr2, gamma_th, fast,
                   horizon, target, warm_slot, warm_deliv):
    acc = np.zeros(_N_ACC)
    slot = 0
    last = 0
    k = 0
    while True:
        ts = _charge(rng, bps, fast)
        acc[I_T1] += ts
        acc[I_NT1] += 1
        t = ts
        if two_nodes:
            tr = _charge(rng, bpr, fast)
            acc[I_T2] += tr
            acc[I_NT2] += 1
            if tr > t:
                t = tr
            acc[I_T3] += t
            acc[I_NT3] += 1
        slot += t
        if horizon > 0 and slot > horizon:
            break
        acc[I_ATT1] += 1
        if _succeed(rng, mode, p, snr1, snr2, gamma_th):
            acc[I_SUC1] += 1
            k += 1
            x = slot - last
            if k > warm_deliv and slot > warm_slot:
                acc[I_DELIV] += 1
                acc[I_AREA] += 0.5 * x * (x + 1.0)
                acc[I_WINDOW] += x
                acc[I_PEAK] += x
                acc[I_PEAK2] += x * x
                acc[I_X] += x
                acc[I_X2] += x * x
            last = slot
            if target > 0 and k >= target:
                break
    acc[I_SLOTS] = slot
    acc[I_ALL_DELIV] = k
    return acc


@njit(cache=True)
def _df_kernel(rng, bps, bpr, mode, p_s, p_r, snr_s, snr_r, gamma_th, fast, banking,
               horizon, target, warm_slot, warm_deliv, max_queue):
    acc = np.zeros(_N_ACC)
    ring_size = max_queue + 1
    ring = np.zeros(ring_size, dtype=np.int64)
    ptr = 0
    src = 0
    u_prev = 0
    d_prev = 0
    full_at = 0
    if banking:
        t0 = _charge(rng, bpr, fast)
        acc[I_T2] += t0
        acc[I_NT2] += 1
        full_at = t0
    k = 0
    while True:
        # next successful source transmission
        while True:
            t = _charge(rng, bps, fast)
            acc[I_T1] += t
            acc[I_NT1] += 1
            src += t
            if horizon > 0 and src > horizon:
                break
            acc[I_ATT1] += 1
            if _succeed(rng, mode, p_s, snr_s, 0.0, gamma_th):
                acc[I_SUC1] += 1
                break
        if horizon > 0 and src > horizon:
            break
        u = src
        # packets still at the relay when this one arrives
        while ptr < k and ring[ptr % ring_size] <= u:
            ptr += 1
        if k - ptr >= max_queue:
            acc[I_DIVERGED] = 1.0
            break
        start = u + 1
        if d_prev + 1 > start:
            start = d_prev + 1
        if banking:
            a = start if start > full_at else full_at
            while True:
                tr = _charge(rng, bpr, fast)
                acc[I_T2] += tr
                acc[I_NT2] += 1
                full_at = a + tr
                acc[I_ATT2] += 1
                if _succeed(rng, mode, p_r, snr_r, 0.0, gamma_th):
                    acc[I_SUC2] += 1
                    break
                a = full_at
            d = a
        else:
            a = start - 1
            while True:
                tr = _charge(rng, bpr, fast)
                acc[I_T2] += tr
                acc[I_NT2] += 1
                a += tr
                acc[I_ATT2] += 1
                if _succeed(rng, mode, p_r, snr_r, 0.0, gamma_th):
                    acc[I_SUC2] += 1
                    break
            d = a
        if horizon > 0 and d > horizon:
            break
        ring[k % ring_size] = d
        k += 1
        if k > warm_deliv and d > warm_slot:
            span = d - d_prev
            first = d_prev + 1 - u_prev
            peak = d - u_prev
            xs = u - u_prev
            xr = d - start + 1
            w = start - u - 1
            acc[I_DELIV] += 1
            acc[I_AREA] += span * first + 0.5 * span * (span - 1.0)
            acc[I_WINDOW] += span
            acc[I_PEAK] += peak
            acc[I_PEAK2] += peak * peak
            acc[I_X] += span
            acc[I_X2] += span * span
            acc[I_XS] += xs
            acc[I_XS2] += xs * xs
            acc[I_XR] += xr
            acc[I_XR2] += xr * xr
            acc[I_W] += w
            acc[I_XSW] += xs * w
            acc[I_Y] += d - u
            acc[I_NPKT] += 1
        u_prev = u
        d_prev = d
        if target > 0 and k >= target:
            break
    acc[I_SLOTS] = src if src > d_prev else d_prev
    acc[I_ALL_DELIV] = k
    return acc


@njit(cache=True)
def _geo_geo_kernel(rng, p_s, p_r, n_slots):
    # out: packets, sum W (slots strictly between arrival and service start),
    #      sum of busy slots seen from the arrival slot on, sum of busy indicators
    d_prev = 0
    n = 0
    w_sum = 0.0
    busy_sum = 0.0
    incl_sum = 0.0
    for u in range(1, n_slots + 1):
        if rng.random() >= p_s:
            continue
        start = u + 1
        busy = d_prev >= u
        if d_prev + 1 > start:
            start = d_prev + 1
        s = 1
        while rng.random() >= p_r:
            s += 1
        d_prev = start + s - 1
        w = start - u - 1
        n += 1
        w_sum += w
        if busy:
            busy_sum += 1.0
            incl_sum += w + 1.0
    return n, w_sum, incl_sum, busy_sum


@dataclass(frozen=True)
class GeoGeoQueueStats:
    packets: int
    mean_wait: float
    mean_wait_arrival_inclusive: float
    busy_on_arrival: float


def simulate_geo_geo_queue(p_s, p_r, n_slots, seed=0):
    """Slotted Geo/Geo/1 relay queue with full capacitors on both hops.

    ``mean_wait`` counts the slots strictly between the arrival slot and the
    start of service (the waiting time that adds to the DF peak AoI).
    ``mean_wait_arrival_inclusive`` also counts the arrival slot whenever the
    relay is busy in it.
    """
    n, w, incl, busy = _geo_geo_kernel(split_stream(seed, 0), float(p_s), float(p_r), int(n_slots))
    return GeoGeoQueueStats(int(n), w / n, incl / n, busy / n)


@dataclass(frozen=True)
class SimConfig:
    """One simulation experiment.

    Exactly one of ``horizon`` (slots per replication) and
    ``target_deliveries`` (deliveries per replication) must be set.
    ``derived`` overrides the success probabilities and normalized
    capacitors computed from ``params``.
    """

    scheme: str
    params: SystemParams
    horizon: Optional[int] = None
    target_deliveries: Optional[int] = None
    seed: int = 0
    warmup_fraction: float = 0.1
    relay_energy_banking: bool = False
    max_queue_alarm: int = 100_000
    replications: int = 10
    physical: bool = False
    fast_charging: bool = False
    derived: Optional[DerivedParams] = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InvalidParam("scheme", f"must be one of {SCHEMES}, got {self.scheme!r}")
        if (self.horizon is None) == (self.target_deliveries is None):
            raise InvalidParam("horizon", "set exactly one of horizon and target_deliveries")
        if self.horizon is not None and self.horizon < 1000:
            raise InvalidParam("horizon", f"must be >= 1000 slots, got {self.horizon}")
        if self.target_deliveries is not None and self.target_deliveries < 1:
            raise InvalidParam("target_deliveries", "must be positive")
        if not 0.0 <= self.warmup_fraction <= 0.5:
            raise InvalidParam("warmup_fraction", f"must lie in [0, 0.5], got {self.warmup_fraction}")
        if self.replications < 1:
            raise InvalidParam("replications", "must be >= 1")
        if self.max_queue_alarm < 1:
            raise InvalidParam("max_queue_alarm", "must be >= 1")
        if self.physical and self.derived is not None:
            raise InvalidParam("physical", "physical fading mode cannot use overridden probabilities")

    def resolved(self) -> DerivedParams:
        if self.derived is not None:
            return self.derived
        return derive(self.params, require_relay=self.scheme == "df")


@dataclass(frozen=True)
class ReplicationResult:
    acc: np.ndarray

    def __getitem__(self, i):
        return self.acc[i]

    @property
    def deliveries(self):
        return int(self.acc[I_DELIV])

    @property
    def aoi(self):
        return self.acc[I_AREA] / self.acc[I_WINDOW] if self.acc[I_WINDOW] else math.nan

    @property
    def paoi(self):
        return self.acc[I_PEAK] / self.acc[I_DELIV] if self.acc[I_DELIV] else math.nan

    @property
    def e_xs_w(self):
        return self.acc[I_XSW] / self.acc[I_NPKT] if self.acc[I_NPKT] else math.nan


@dataclass
class AgeStats:
    """Aggregated simulator output over independent replications."""

    scheme: str
    mean_aoi: float
    mean_paoi: float
    ci95_aoi: float
    ci95_paoi: float
    deliveries: int
    empirical_p_suc: dict
    empirical_mean_t: dict
    mean_queue_len: float
    e_xs_w_estimate: Optional[float]
    diverged: bool
    x_mean: float = math.nan
    x_second: float = math.nan
    xs_mean: float = math.nan
    xs_second: float = math.nan
    xr_mean: float = math.nan
    xr_second: float = math.nan
    mean_wait: float = math.nan
    replications: list = field(default_factory=list, repr=False)

    @property
    def se_aoi(self):
        return self.ci95_aoi / 1.96

    @property
    def se_paoi(self):
        return self.ci95_paoi / 1.96


def _kernel_args(config: SimConfig, d: DerivedParams):
    p = config.params
    s2, a, g = p.sigma2, p.alpha, p.gamma_th
    if config.horizon is not None:
        horizon, target = int(config.horizon), 0
        warm_slot, warm_deliv = int(config.warmup_fraction * config.horizon), 0
    else:
        horizon, target = 0, int(config.target_deliveries)
        warm_slot, warm_deliv = 0, int(config.warmup_fraction * config.target_deliveries)
    mode_hop = _PHYSICAL_HOP if config.physical else _BERNOULLI
    fast = bool(config.fast_charging)
    if config.scheme == "direct":
        return ("onehop", (False, d.bprime_s, 0.0, mode_hop, d.p_suc_direct,
                           p.b_s / (p.d_ds ** a * s2), 0.0, g, fast, horizon, target, warm_slot, warm_deliv))
    if config.scheme == "af":
        mode = _PHYSICAL_AF if config.physical else _BERNOULLI
        return ("onehop", (True, d.bprime_s, d.bprime_r, mode, d.p_suc_af,
                           p.b_s / (p.d_rs ** a * s2), p.b_r / (p.d_dr ** a * s2), g, fast,
                           horizon, target, warm_slot, warm_deliv))
    snr_r = d.b_star_r / (p.d_dr ** a * s2) if config.derived is None else 0.0
    return ("df", (d.bprime_s, d.bprime_r, mode_hop, d.p_suc_s, d.p_suc_r,
                   p.b_s / (p.d_rs ** a * s2), snr_r, g, fast, bool(config.relay_energy_banking),
                   horizon, target, warm_slot, warm_deliv, int(config.max_queue_alarm)))


def run_replication(config: SimConfig, index: int, derived: Optional[DerivedParams] = None) -> ReplicationResult:
    """Run replication ``index`` on its own stream ``split(seed, index)``."""
    d = derived if derived is not None else config.resolved()
    kind, args = _kernel_args(config, d)
    rng = split_stream(config.seed, index)
    if kind == "onehop":
        acc = _onehop_kernel(rng, *args)
    else:
        acc = _df_kernel(rng, *args)
    return ReplicationResult(acc)


def _run_one(payload):
    config, index, derived = payload
    return run_replication(config, index, derived)


def _ci95(values):
    v = np.asarray([x for x in values if not math.isnan(x)])
    if v.size < 2:
        return math.inf
    return 1.96 * v.std(ddof=1) / math.sqrt(v.size)


def _ratio(num, den):
    return num / den if den else math.nan


def aggregate(scheme, reps) -> AgeStats:
    """Combine replications in index order into an :class:`AgeStats`."""
    total = np.sum([r.acc for r in reps], axis=0)
    aois = [r.aoi for r in reps]
    paois = [r.paoi for r in reps]
    diverged = bool(total[I_DIVERGED] > 0)
    if scheme == "df":
        p_suc = {"source_relay": _ratio(total[I_SUC1], total[I_ATT1]),
                 "relay_destination": _ratio(total[I_SUC2], total[I_ATT2])}
        mean_t = {"source": _ratio(total[I_T1], total[I_NT1]), "relay": _ratio(total[I_T2], total[I_NT2])}
    elif scheme == "af":
        p_suc = {"end_to_end": _ratio(total[I_SUC1], total[I_ATT1])}
        mean_t = {"source": _ratio(total[I_T1], total[I_NT1]), "relay": _ratio(total[I_T2], total[I_NT2]),
                  "both": _ratio(total[I_T3], total[I_NT3])}
    else:
        p_suc = {"source_destination": _ratio(total[I_SUC1], total[I_ATT1])}
        mean_t = {"source": _ratio(total[I_T1], total[I_NT1])}
    stats = AgeStats(
        scheme=scheme,
        mean_aoi=float(np.nanmean(aois)) if not all(math.isnan(a) for a in aois) else math.nan,
        mean_paoi=float(np.nanmean(paois)) if not all(math.isnan(a) for a in paois) else math.nan,
        ci95_aoi=_ci95(aois),
        ci95_paoi=_ci95(paois),
        deliveries=int(total[I_DELIV]),
        empirical_p_suc=p_suc,
        empirical_mean_t=mean_t,
        mean_queue_len=_ratio(total[I_Y], total[I_WINDOW]) if scheme == "df" else 0.0,
        e_xs_w_estimate=_ratio(total[I_XSW], total[I_NPKT]) if scheme == "df" else None,
        diverged=diverged,
        x_mean=_ratio(total[I_X], total[I_DELIV]),
        x_second=_ratio(total[I_X2], total[I_DELIV]),
        replications=list(reps),
    )
    if scheme == "df":
        stats.xs_mean = _ratio(total[I_XS], total[I_NPKT])
        stats.xs_second = _ratio(total[I_XS2], total[I_NPKT])
        stats.xr_mean = _ratio(total[I_XR], total[I_NPKT])
        stats.xr_second = _ratio(total[I_XR2], total[I_NPKT])
        stats.mean_wait = _ratio(total[I_W], total[I_NPKT])
    return stats


def run(config: SimConfig, workers: Optional[int] = None, raise_on_diverge=False) -> AgeStats:
    """Run every replication and aggregate.

    Replications are independent and may be spread over ``workers``
    processes; the result does not depend on the worker count.
    """
    validate(config.params)
    derived = config.resolved()
    jobs = [(config, i, derived) for i in range(config.replications)]
    if workers is None or workers <= 1 or config.replications == 1:
        reps = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, os.cpu_count() or 1)) as pool:
            reps = list(pool.map(_run_one, jobs))
    stats = aggregate(config.scheme, reps)
    if stats.diverged and raise_on_diverge:
        raise Diverged(f"relay queue exceeded {config.max_queue_alarm} packets")
    return stats


# ------------------------------------------------------------ validation


@dataclass(frozen=True)
class ComparisonRow:
    metric: str
    analytic: float
    empirical: float
    se: float
    ok: bool
    rule: str = "3se"


def _rep_spread(reps, fn):
    vals = np.array([fn(r) for r in reps], dtype=float)
    vals = vals[~np.isnan(vals)]
    if vals.size < 2:
        return math.inf
    return vals.std(ddof=1) / math.sqrt(vals.size)


def _row(metric, analytic, empirical, se, k=3.0):
    return ComparisonRow(metric, analytic, empirical, se, abs(empirical - analytic) <= k * se)


def validate_against_analysis(config: SimConfig, stats: Optional[AgeStats] = None, workers=None):
    """Side-by-side analytic versus simulated quantities.

    Each row is flagged ``ok`` when the two agree within three standard
    errors; the DF peak AoI row instead checks ``sim <= bound + 3 SE``.
    """
    d = config.resolved()
    if stats is None:
        stats = run(config, workers=workers)
    reps = stats.replications
    rows = []
    scheme = config.scheme

    def binom(name, p, succ_i, att_i):
        n = sum(r[att_i] for r in reps)
        emp = sum(r[succ_i] for r in reps) / n
        rows.append(_row(f"p_suc[{name}]", p, emp, math.sqrt(max(p * (1 - p), 1e-300) / n)))

    def tmean(name, analytic, sum_i, n_i):
        emp = sum(r[sum_i] for r in reps) / sum(r[n_i] for r in reps)
        rows.append(_row(f"E[T][{name}]", analytic, emp, _rep_spread(reps, lambda r: r[sum_i] / r[n_i])))

    xmean_se = _rep_spread(reps, lambda r: r[I_X] / r[I_DELIV] if r[I_DELIV] else math.nan)
    x2_se = _rep_spread(reps, lambda r: r[I_X2] / r[I_DELIV] if r[I_DELIV] else math.nan)
    if scheme in ("direct", "af"):
        res = an.analyze_scheme(d, scheme)
        if scheme == "direct":
            binom("source_destination", d.p_suc_direct, I_SUC1, I_ATT1)
            tmean("source", 1 + d.bprime_s, I_T1, I_NT1)
        else:
            binom("end_to_end", d.p_suc_af, I_SUC1, I_ATT1)
            tmean("source", 1 + d.bprime_s, I_T1, I_NT1)
            tmean("relay", 1 + d.bprime_r, I_T2, I_NT2)
            t_af = an.af_wait_moments(an.AfWaitDist(d.bprime_s, d.bprime_r))[0]
            tmean("both", t_af, I_T3, I_NT3)
        rows.append(_row("E[X]", res.x.mean, stats.x_mean, xmean_se))
        rows.append(_row("E[X^2]", res.x.second, stats.x_second, x2_se))
        rows.append(_row("PAoI", res.paoi, stats.mean_paoi, stats.se_paoi))
        rows.append(_row("AoI", res.aoi, stats.mean_aoi, stats.se_aoi))
        return rows
    binom("source_relay", d.p_suc_s, I_SUC1, I_ATT1)
    binom("relay_destination", d.p_suc_r, I_SUC2, I_ATT2)
    tmean("source", 1 + d.bprime_s, I_T1, I_NT1)
    if not config.relay_energy_banking:
        tmean("relay", 1 + d.bprime_r, I_T2, I_NT2)
    xs = an.source_cycle(d.bprime_s, d.p_suc_s)
    xr = an.relay_cycle(d.bprime_r, d.p_suc_r)
    pk = lambda r, i: r[i] / r[I_NPKT] if r[I_NPKT] else math.nan  # noqa: E731
    rows.append(_row("E[X_s]", xs.mean, stats.xs_mean, _rep_spread(reps, lambda r: pk(r, I_XS))))
    rows.append(_row("E[X_s^2]", xs.second, stats.xs_second, _rep_spread(reps, lambda r: pk(r, I_XS2))))
    if not config.relay_energy_banking:
        rows.append(_row("E[X_r]", xr.mean, stats.xr_mean, _rep_spread(reps, lambda r: pk(r, I_XR))))
        rows.append(_row("E[X_r^2]", xr.second, stats.xr_second, _rep_spread(reps, lambda r: pk(r, I_XR2))))
    try:
        bound = an.paoi_df_upper(xs, xr).value
        rows.append(ComparisonRow("PAoI<=bound", bound, stats.mean_paoi, stats.se_paoi,
                                  stats.mean_paoi <= bound + 3 * stats.se_paoi, "upper_bound"))
    except an.UnstableQueue:
        rows.append(ComparisonRow("PAoI<=bound", math.inf, stats.mean_paoi, stats.se_paoi, stats.diverged,
                                  "unstable"))
        return rows
    hybrid = [an.aoi_df_hybrid(xs, xr, r.e_xs_w) for r in reps]
    hybrid_value = an.aoi_df_hybrid(xs, xr, stats.e_xs_w_estimate)
    se = math.hypot(stats.se_aoi, _ci95(hybrid) / 1.96)
    rows.append(_row("AoI(hybrid)", hybrid_value, stats.mean_aoi, se))
    return rows


def with_overrides(derived: DerivedParams, **changes) -> DerivedParams:
    return replace(derived, **changes)
