"""Physical inputs of the wireless-powered relay network and derived scalars.

Every downstream computation consumes :class:`DerivedParams`, built by
:func:`derive` in a fixed order: source success probability, then the DF
relay's effective transmit energy, then the relay success probability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .errors import DivideByZeroProb, InvalidParam, RelayPowerInfeasible
from .specfun import bessel_k1e

__all__ = [
    "SystemParams",
    "DerivedParams",
    "validate",
    "db_to_linear",
    "normalized_capacitor",
    "link_success_prob",
    "success_prob_df_source",
    "success_prob_df_relay",
    "success_prob_direct",
    "success_prob_af",
    "effective_relay_power",
    "expected_retransmissions",
    "derive",
]

_LOG_UNDERFLOW = 700.0

_POSITIVE = ("p_t", "eta", "sigma2", "alpha", "d_sp", "d_rp", "d_rs", "d_dr", "d_ds", "b_s", "b_r", "gamma_th")


@dataclass(frozen=True)
class SystemParams:
    """Raw physical parameters, all in linear units.

    ``gamma_th`` is the linear SNR threshold; use :func:`db_to_linear` for
    values quoted in dB.
    """

    p_t: float
    eta: float = 0.8
    sigma2: float = 1.0
    alpha: float = 2.0
    d_sp: float = 1.0
    d_rp: float = 1.0
    d_rs: float = 6.0
    d_dr: float = 4.0
    d_ds: float = 10.0
    b_s: float = 1000.0
    b_r: float = 1000.0
    gamma_th: float = 10 ** 1.6
    c_p: float = 0.01

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class DerivedParams:
    bprime_s: float
    bprime_r: float
    p_suc_s: float
    p_suc_r: float
    p_suc_af: float
    p_suc_direct: float
    b_star_r: float


def db_to_linear(x_db):
    return 10.0 ** (float(x_db) / 10.0)


def validate(raw: SystemParams) -> SystemParams:
    """Return ``raw`` unchanged, or raise :class:`InvalidParam`."""
    for name in _POSITIVE:
        v = getattr(raw, name)
        if not isinstance(v, (int, float)) or math.isnan(v):
            raise InvalidParam(name, f"must be a number, got {v!r}")
        if not v > 0:
            raise InvalidParam(name, f"must be > 0, got {v}")
        if math.isinf(v):
            raise InvalidParam(name, "must be finite")
    if raw.eta > 1:
        raise InvalidParam("eta", f"must be <= 1, got {raw.eta}")
    if not raw.c_p >= 0 or math.isinf(raw.c_p):
        raise InvalidParam("c_p", f"must be finite and >= 0, got {raw.c_p}")
    return raw


def normalized_capacitor(d, alpha, b, eta, p_t):
    """B' = d**alpha * b / (eta * p_t): capacitor size in units of mean per-slot harvest."""
    return d ** alpha * b / (eta * p_t)


def _exp_neg(exponent):
    # exponent >= 0; exp(-exponent), going through log space past the underflow edge
    if exponent > _LOG_UNDERFLOW:
        return math.exp(max(-exponent, -1e308))
    return math.exp(-exponent)


def link_success_prob(sigma2, gamma_th, d, alpha, energy):
    """P(|h|**2 * energy / (d**alpha * sigma2) >= gamma_th) for Rayleigh |h|."""
    if energy <= 0:
        raise RelayPowerInfeasible(f"transmit energy must be positive, got {energy}")
    return _exp_neg(sigma2 * gamma_th * d ** alpha / energy)


def success_prob_df_source(params: SystemParams) -> float:
    return link_success_prob(params.sigma2, params.gamma_th, params.d_rs, params.alpha, params.b_s)


def success_prob_direct(params: SystemParams) -> float:
    # Same Rayleigh template as the source-relay hop, over d_ds with the source energy.
    return link_success_prob(params.sigma2, params.gamma_th, params.d_ds, params.alpha, params.b_s)


def effective_relay_power(params: SystemParams, p_suc_s=None) -> float:
    """B*_r = B_r - C_p / P_suc,s: relay energy left after decoding retransmissions."""
    if p_suc_s is None:
        p_suc_s = success_prob_df_source(params)
    if params.c_p == 0:
        return params.b_r
    b_star = params.b_r - params.c_p * expected_retransmissions(p_suc_s) if p_suc_s > 0 else -math.inf
    if not b_star > 0:
        raise RelayPowerInfeasible(
            f"B_r={params.b_r} does not cover the processing cost C_p/P_suc,s={params.c_p}/{p_suc_s}"
        )
    return b_star


def success_prob_df_relay(params: SystemParams, b_star_r=None) -> float:
    if b_star_r is None:
        b_star_r = effective_relay_power(params)
    if not b_star_r > 0:
        raise RelayPowerInfeasible(f"effective relay energy must be positive, got {b_star_r}")
    return link_success_prob(params.sigma2, params.gamma_th, params.d_dr, params.alpha, b_star_r)


def success_prob_af(params: SystemParams) -> float:
    """End-to-end AF success probability with the Bessel-K1 correction factor.

    The ``exp(-sqrt(beta))`` part of ``K1`` is folded into the exponent so
    that the product stays representable for large thresholds.
    """
    s2, g, a = params.sigma2, params.gamma_th, params.alpha
    load_s = params.d_rs ** a / params.b_s
    load_r = params.d_dr ** a / params.b_r
    beta = 4.0 * s2 * s2 * g * (g + 1.0) * load_s * load_r
    root = math.sqrt(beta)
    exponent = g * s2 * (load_s + load_r)
    if root == 0.0:
        return _exp_neg(exponent)
    # sqrt(beta)*K1(sqrt(beta)) = exp(-root) * root * k1e(root)
    log_p = -exponent - root + math.log(root * bessel_k1e(root))
    if log_p < -_LOG_UNDERFLOW:
        return math.exp(max(log_p, -1e308))
    return min(1.0, math.exp(log_p))


def expected_retransmissions(p_suc) -> float:
    """Mean number of attempts until the first success, 1/p."""
    if p_suc <= 0:
        raise DivideByZeroProb("success probability is zero")
    return 1.0 / p_suc


def derive(params: SystemParams, require_relay=True) -> DerivedParams:
    """Compute every derived scalar for ``params``.

    With ``require_relay=False`` an infeasible DF relay energy is tolerated
    and reported as ``b_star_r = nan``, ``p_suc_r = nan`` so direct and AF
    results can still be produced.
    """
    validate(params)
    bs = normalized_capacitor(params.d_sp, params.alpha, params.b_s, params.eta, params.p_t)
    br = normalized_capacitor(params.d_rp, params.alpha, params.b_r, params.eta, params.p_t)
    p_s = success_prob_df_source(params)
    try:
        b_star = effective_relay_power(params, p_s)
        p_r = success_prob_df_relay(params, b_star)
    except (RelayPowerInfeasible, DivideByZeroProb):
        if require_relay:
            raise
        b_star = p_r = math.nan
    return DerivedParams(
        bprime_s=bs,
        bprime_r=br,
        p_suc_s=p_s,
        p_suc_r=p_r,
        p_suc_af=success_prob_af(params),
        p_suc_direct=success_prob_direct(params),
        b_star_r=b_star,
    )
