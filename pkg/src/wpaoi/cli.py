"""Command-line experiment runner; every mode writes CSV.

Modes (exactly one)::

    wpaoi --config run.ini          one parameter set or a one-parameter sweep
    wpaoi --preset fig4             a figure grid, all schemes of the figure
    wpaoi --table1 [--config f]     the 16 DF special cases and 4 AF cases
    wpaoi --selftest                invariant suite, exit 3 on any failure

Common flags: ``--seed``, ``--replications``, ``--fast`` (1e5 instead of 1e6
deliveries per point), ``--out`` (default stdout), ``--workers``,
``--no-sim`` (analytic columns only), ``--max-slots`` (per-replication slot
budget; with ``--fast-charging`` it counts transmission attempts),
``--fast-charging`` (one shifted-Poisson draw per charge instead of one
exponential per slot; needed for practical runtimes at low P_t).

Config file: flat ``key = value`` lines, ``#`` comments. Keys:

* any :class:`~wpaoi.system.SystemParams` field (``p_t``, ``eta``, ``sigma2``,
  ``alpha``, ``d_sp``, ``d_rp``, ``d_rs``, ``d_dr``, ``d_ds``, ``b_s``, ``b_r``,
  ``gamma_th``, ``c_p``); a ``_db`` suffix (``gamma_th_db``) gives the value
  in dB. Unset fields take the fig4 baseline.
* ``schemes``: comma list out of ``direct, df, af`` (default all three).
* simulator settings: ``horizon`` or ``target_deliveries`` (per replication),
  ``seed``, ``replications``, ``warmup_fraction``, ``relay_energy_banking``,
  ``max_queue_alarm``, ``physical``, ``fast_charging``.
* ``sweep`` (a parameter key, ``_db`` allowed) with ``sweep_values`` (comma list).

CSV columns, in order: ``scheme``, the 13 parameter fields, ``paoi_analytic``,
``paoi_kind`` (exact|bound), ``aoi_analytic`` (empty for DF), ``paoi_sim``,
``aoi_sim``, ``ci95_paoi``, ``ci95_aoi``, ``p_suc_s``, ``p_suc_r``,
``p_suc_af``, ``p_suc_direct``, ``deliveries``, ``diverged``, ``preset``,
``series``, ``x_name``, ``x_value``, ``note``. Floats carry 12 significant
digits; an unstable DF bound is written as ``inf``. The first line is a
``#`` comment with the tool version, seed and a hash of the experiment.

Exit codes: 0 success, 1 model error, 2 config error, 3 selftest failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass, fields, replace
from typing import Optional

from . import __version__
from . import analysis as an
from . import simulator as sim
from .errors import ConfigError, InvalidParam, WpaoiError
from .presets import BASELINE, PRESETS, PresetPoint, get_preset
from .system import SystemParams, db_to_linear, derive, validate

PARAM_FIELDS = tuple(f.name for f in fields(SystemParams))
SWEEPABLE = PARAM_FIELDS + tuple(f"{name}_db" for name in ("gamma_th",))
COLUMNS = (
    ("scheme",) + PARAM_FIELDS + (
        "paoi_analytic", "paoi_kind", "aoi_analytic", "paoi_sim", "aoi_sim", "ci95_paoi", "ci95_aoi",
        "p_suc_s", "p_suc_r", "p_suc_af", "p_suc_direct", "deliveries", "diverged",
        "preset", "series", "x_name", "x_value", "note",
    )
)
TABLE1_COLUMNS = ("scheme", "source_capacitor", "source_success", "relay_capacitor", "relay_success",
                  "queue_label", "stability", "utilization", "paoi", "bound_kind", "exact_paoi")

EXIT_OK, EXIT_MODEL, EXIT_CONFIG, EXIT_SELFTEST = 0, 1, 2, 3
FULL_DELIVERIES, FAST_DELIVERIES = 1_000_000, 100_000
DEFAULT_MAX_SLOTS = 100_000_000

_SIM_INT = ("horizon", "target_deliveries", "seed", "replications", "max_queue_alarm")
_SIM_FLOAT = ("warmup_fraction",)
_SIM_BOOL = ("relay_energy_banking", "physical", "fast_charging")
_SCHEMES = ("direct", "df", "af")


@dataclass
class SimSettings:
    seed: int = 0
    replications: int = 10
    horizon: Optional[int] = None
    target_deliveries: Optional[int] = None
    total_deliveries: int = FULL_DELIVERIES
    warmup_fraction: float = 0.1
    relay_energy_banking: bool = False
    max_queue_alarm: int = 100_000
    physical: bool = False
    fast_charging: bool = False
    max_slots: int = DEFAULT_MAX_SLOTS
    workers: Optional[int] = None
    enabled: bool = True


@dataclass
class Experiment:
    points: list
    schemes: tuple
    sim: SimSettings
    preset: str = ""


# ----------------------------------------------------------------- config


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12g}"
    return str(v)


def _parse_float(key, text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {text!r}") from None


def _parse_bool(key, text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: not a boolean: {text!r}")


def _param_value(key, text):
    """(field name, linear value) for a parameter key, converting ``_db`` inputs."""
    value = _parse_float(key, text)
    if key.endswith("_db"):
        name = key[:-3]
        if name not in PARAM_FIELDS:
            raise ConfigError(f"unknown parameter {key!r}")
        return name, db_to_linear(value)
    if key not in PARAM_FIELDS:
        raise ConfigError(f"unknown parameter {key!r}")
    return key, value


def read_config_text(text):
    """Parse flat ``key = value`` text into a dict of raw strings."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string("[wpaoi]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    return dict(parser["wpaoi"])


def _check_sim_settings(s: SimSettings):
    # caught here so that --no-sim runs reject the same files as full runs
    if s.horizon is not None and s.target_deliveries is not None:
        raise ConfigError("set at most one of horizon and target_deliveries")
    if s.horizon is not None and s.horizon < 1000:
        raise ConfigError(f"horizon must be >= 1000 slots, got {s.horizon}")
    if s.target_deliveries is not None and s.target_deliveries < 1:
        raise ConfigError("target_deliveries must be positive")
    if not 0.0 <= s.warmup_fraction <= 0.5:
        raise ConfigError(f"warmup_fraction must lie in [0, 0.5], got {s.warmup_fraction}")
    if s.max_queue_alarm < 1:
        raise ConfigError("max_queue_alarm must be >= 1")


def build_experiment(raw: dict, sim_settings: SimSettings) -> Experiment:
    params = BASELINE
    schemes = _SCHEMES
    sweep = sweep_values = None
    for key, text in raw.items():
        if key == "schemes":
            schemes = tuple(s.strip() for s in text.split(",") if s.strip())
            bad = [s for s in schemes if s not in _SCHEMES]
            if bad or not schemes:
                raise ConfigError(f"schemes: unknown {bad or text!r}")
        elif key == "sweep":
            sweep = text.strip()
            if sweep not in SWEEPABLE:
                raise ConfigError(f"sweep: {sweep!r} is not one of {SWEEPABLE}")
        elif key == "sweep_values":
            sweep_values = [_parse_float(key, v) for v in text.split(",") if v.strip()]
        elif key in _SIM_INT:
            try:
                setattr(sim_settings, key, int(text))
            except ValueError:
                raise ConfigError(f"{key}: not an integer: {text!r}") from None
        elif key in _SIM_FLOAT:
            setattr(sim_settings, key, _parse_float(key, text))
        elif key in _SIM_BOOL:
            setattr(sim_settings, key, _parse_bool(key, text))
        else:
            name, value = _param_value(key, text)
            params = replace(params, **{name: value})
    if (sweep is None) != (sweep_values is None):
        raise ConfigError("sweep and sweep_values must be given together")
    _check_sim_settings(sim_settings)
    try:
        validate(params)
        if sweep is None:
            points = [PresetPoint("", "", math.nan, params)]
        else:
            points = []
            for v in sweep_values:
                name, lin = _param_value(sweep, repr(v))
                p = replace(params, **{name: lin})
                validate(p)
                points.append(PresetPoint("", sweep, v, p))
    except InvalidParam as exc:
        raise ConfigError(str(exc)) from None
    return Experiment(points, schemes, sim_settings)


def experiment_hash(exp: Experiment, mode: str) -> str:
    s = exp.sim
    blob = {
        "mode": mode,
        "preset": exp.preset,
        "schemes": list(exp.schemes),
        "points": [[pt.series, pt.x_name, pt.x_value, pt.params.as_dict()] for pt in exp.points],
        "sim": {k: getattr(s, k) for k in ("replications", "horizon", "target_deliveries", "total_deliveries",
                                           "warmup_fraction", "relay_energy_banking", "max_queue_alarm",
                                           "physical", "fast_charging", "max_slots", "enabled")},
    }
    text = json.dumps(blob, sort_keys=True, default=repr)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


# -------------------------------------------------------------- evaluation


def _sim_length(settings: SimSettings, mean_cycle, attempts=1.0):
    """(horizon, target, capped) for one point.

    The budget ``max_slots`` counts simulated slots. With fast charging a
    charge costs one draw whatever its length, so the budget then counts
    transmission attempts (``attempts`` per delivery) instead.
    """
    if settings.horizon is not None:
        return settings.horizon, None, False
    target = settings.target_deliveries or max(1, settings.total_deliveries // settings.replications)
    work = attempts if settings.fast_charging else mean_cycle
    expected = work * target * (1.0 + settings.warmup_fraction)
    if math.isfinite(expected) and expected <= settings.max_slots:
        return None, target, False
    if not math.isfinite(work):
        return max(1000, settings.max_slots), None, True
    affordable = settings.max_slots / work
    return max(1000, int(affordable * mean_cycle)), None, True


def evaluate_point(pt: PresetPoint, scheme: str, settings: SimSettings, strict=False) -> dict:
    row = {c: None for c in COLUMNS}
    row.update(pt.params.as_dict())
    row.update(scheme=scheme, series=pt.series, x_name=pt.x_name,
               x_value=pt.x_value if pt.x_name else None, note="")
    d = derive(pt.params, require_relay=strict and scheme == "df")
    row.update(p_suc_s=d.p_suc_s, p_suc_r=d.p_suc_r, p_suc_af=d.p_suc_af, p_suc_direct=d.p_suc_direct)
    notes = []
    if scheme == "df":
        row["paoi_kind"] = "bound"
        if math.isnan(d.p_suc_r):
            row["note"] = "relay_infeasible"
            return row
        res = an.analyze_scheme(d, "df")
        row["paoi_analytic"] = res.paoi if res.stable else math.inf
        mean_cycle = res.x.mean
        attempts = 1.0 / d.p_suc_s + 1.0 / d.p_suc_r
        if not res.stable:
            notes.append("unstable")
    else:
        res = an.analyze_scheme(d, scheme)
        row.update(paoi_analytic=res.paoi, paoi_kind="exact", aoi_analytic=res.aoi)
        mean_cycle = res.x.mean
        attempts = 1.0 / (d.p_suc_direct if scheme == "direct" else d.p_suc_af)
    if not settings.enabled:
        row["note"] = ";".join(notes)
        return row
    if scheme == "df" and not res.stable and not strict:
        notes.append("sim_skipped")
        row["note"] = ";".join(notes)
        return row
    horizon, target, capped = _sim_length(settings, mean_cycle, attempts)
    if capped:
        notes.append("horizon_capped")
    cfg = sim.SimConfig(
        scheme, pt.params, horizon=horizon, target_deliveries=target, seed=settings.seed,
        warmup_fraction=settings.warmup_fraction, relay_energy_banking=settings.relay_energy_banking,
        max_queue_alarm=settings.max_queue_alarm, replications=settings.replications,
        physical=settings.physical, fast_charging=settings.fast_charging, derived=None,
    )
    stats = sim.run(cfg, workers=settings.workers)
    row.update(paoi_sim=stats.mean_paoi, aoi_sim=stats.mean_aoi, ci95_paoi=stats.ci95_paoi,
               ci95_aoi=stats.ci95_aoi, deliveries=stats.deliveries, diverged=stats.diverged)
    row["note"] = ";".join(notes)
    return row


def run_experiment(exp: Experiment, strict=False):
    return [evaluate_point(pt, s, exp.sim, strict) for pt in exp.points for s in exp.schemes]


def table1_rows(params: SystemParams):
    d = derive(params)
    rows = []
    for spec in an.all_special_cases():
        res = an.special_case(spec, d)
        rows.append({
            "scheme": "df", "source_capacitor": spec.source_capacitor, "source_success": spec.source_success,
            "relay_capacitor": spec.relay_capacitor, "relay_success": spec.relay_success,
            "queue_label": spec.queue_label, "stability": "stable" if res.stable else "unstable",
            "utilization": res.stability_utilization,
            "paoi": res.value if res.stable else "UNSTABLE",
            "bound_kind": res.bound_kind, "exact_paoi": res.exact_value,
        })
    for full in (True, False):
        for det in (True, False):
            cap = "full" if full else "charging"
            suc = "deterministic" if det else "random"
            rows.append({
                "scheme": "af", "source_capacitor": cap, "source_success": suc,
                "relay_capacitor": cap, "relay_success": suc, "queue_label": "", "stability": "stable",
                "utilization": None, "paoi": an.af_special_case(full, det, d), "bound_kind": "exact",
                "exact_paoi": None,
            })
    return rows


# ------------------------------------------------------------------ output


def write_csv(stream, rows, columns, header_comment):
    stream.write(header_comment + "\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])


def _header(mode, seed, digest):
    return f"# wpaoi {__version__} mode={mode} seed={seed} config_sha256={digest}"


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def build_parser():
    p = argparse.ArgumentParser(prog="wpaoi", description="AoI / peak AoI of wireless-powered relaying.")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--preset", choices=sorted(PRESETS))
    mode.add_argument("--table1", action="store_true", help="Table of DF and AF special cases")
    mode.add_argument("--selftest", action="store_true")
    p.add_argument("--config", help="flat key = value experiment file")
    p.add_argument("--seed", type=int)
    p.add_argument("--replications", type=int)
    p.add_argument("--fast", action="store_true", help="1e5 deliveries per point instead of 1e6")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--workers", type=int, help="processes for replications")
    p.add_argument("--no-sim", action="store_true", help="analytic columns only")
    p.add_argument("--max-slots", type=int, default=DEFAULT_MAX_SLOTS, help="slot budget per replication (attempts with --fast-charging)")
    p.add_argument("--fast-charging", action="store_true", help="draw charging times as 1 + Poisson(B')")
    return p


def _settings_from_args(args) -> SimSettings:
    s = SimSettings()
    s.total_deliveries = FAST_DELIVERIES if args.fast else FULL_DELIVERIES
    s.max_slots = args.max_slots
    s.workers = args.workers
    s.enabled = not args.no_sim
    s.fast_charging = args.fast_charging
    return s


def _apply_cli_overrides(s: SimSettings, args):
    if args.seed is not None:
        s.seed = args.seed
    if args.replications is not None:
        s.replications = args.replications
    if s.replications < 1:
        raise ConfigError("replications must be >= 1")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.selftest:
            from .selftest import run_selftest
            results = run_selftest()
            for r in results:
                print(f"{'PASS' if r.ok else 'FAIL'} {r.name}: {r.detail}")
            return EXIT_OK if all(r.ok for r in results) else EXIT_SELFTEST
        settings = _settings_from_args(args)
        raw = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    raw = read_config_text(fh.read())
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
        if args.table1:
            exp = build_experiment(raw, settings)
            rows = table1_rows(exp.points[0].params)
            columns, mode = TABLE1_COLUMNS, "table1"
        elif args.preset:
            if raw:
                raise ConfigError("--preset takes no --config")
            preset = get_preset(args.preset)
            exp = Experiment(preset.points(), preset.schemes, settings, preset=preset.name)
            _apply_cli_overrides(settings, args)
            rows = run_experiment(exp)
            for r in rows:
                r["preset"] = preset.name
            columns, mode = COLUMNS, f"preset:{preset.name}"
        elif args.config:
            exp = build_experiment(raw, settings)
            _apply_cli_overrides(settings, args)
            rows = run_experiment(exp, strict=True)
            columns, mode = COLUMNS, "run"
        else:
            raise ConfigError("choose one of --config, --preset, --table1, --selftest")
        digest = experiment_hash(exp, mode)
        buf = io.StringIO()
        write_csv(buf, rows, columns, _header(mode, settings.seed, digest))
        stream, close = _open_out(args.out)
        try:
            stream.write(buf.getvalue())
        finally:
            if close:
                stream.close()
        return EXIT_OK
    except (ConfigError, InvalidParam) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WpaoiError as exc:
        print(f"model error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
