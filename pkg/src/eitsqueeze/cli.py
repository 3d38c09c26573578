"""
Command-line front end.

Every command writes one table, CSV (with ``# key = value`` header lines)
or JSON (``{"meta": ..., "rows": [...]}``).  The header records every input
so an output file can be passed back through ``--config`` to regenerate the
same table.  Rates are in units of ``gamma0`` unless ``--gamma0-hz`` is set,
in which case rate inputs and rate columns are in the unit of that value.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConvergenceError, NonStationaryError, ParameterError, UndefinedSpinError
from .noise import spectrum_analytic, spin_spectrum, variance_pipeline
from .effective_model import noise_model
from .optimize import asymptotic_pumps, field_limit, field_scan, optimize_pumps, scaling_study
from .params import EffectiveParams

try:
    from importlib.metadata import PackageNotFoundError, version

    try:
        VERSION = version("artifact")
    except PackageNotFoundError:
        VERSION = "0.1.0"
except ImportError:  # pragma: no cover
    VERSION = "0.1.0"

COMMANDS = ("variance", "scan-gamma", "optimize", "scaling", "spectrum", "field-scan", "validate")

FIGURES = {
    "variance": "squeezing figure at one parameter point",
    "scan-gamma": "squeezing figure, Sy variance and mean spin versus pumping rates",
    "optimize": "optimal pump rates and squeezing",
    "scaling": "optimized squeezing versus cooperativity",
    "spectrum": "Sy noise spectrum split into field and atomic parts",
    "field-scan": "squeezing figure versus intracavity field amplitude",
    "validate": "self-consistency checks",
}

# key -> (default, kind).  Kinds: float, sweep, int, str.
PARAMETERS = {
    "c": (100.0, "float"),
    "rho": (1 / 2000, "float"),
    "gamma_p": ("5.5", "sweep"),
    "gamma_p_prime": ("25", "sweep"),
    "n": (1e6, "float"),
    "delta_tilde": (0.0, "float"),
    "delta_c": (0.0, "float"),
    "field": (0.0, "float"),
    "omega": ("1e-4:10:log200", "sweep"),
    "amplitude": ("0:10:lin101", "sweep"),
    "c_values": ("1e2:1e6:log5", "sweep"),
    "grid": (41, "int"),
    "gamma0_hz": (None, "float"),
}
# Written in the header but not part of the computation.
META_KEYS = ("command", "version", "figure", "format")
RUN_KEYS = ("output", "threads")

# Rate-valued inputs and output columns, converted by --gamma0-hz.
RATE_INPUTS = ("gamma_p", "gamma_p_prime", "delta_tilde", "delta_c", "field", "amplitude")
RATE_COLUMNS = {
    "Gamma_p",
    "Gamma_p_prime",
    "Gamma_p_star",
    "Gamma_p_prime_star",
    "Gamma_p_star_asymptotic",
    "Gamma_p_prime_star_asymptotic",
    "amplitude",
    "field_limit",
    "gamma_plus",
    "width",
}


class ConfigError(ParameterError):
    """Invalid configuration entry; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class RunConfig:
    command: str
    parameters: dict = field(default_factory=dict)
    output_path: str | None = None
    format: str = "csv"
    threads: int | None = None

    def value(self, key):
        if key in self.parameters:
            return self.parameters[key]
        return PARAMETERS[key][0]


@dataclass
class Table:
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)
    ok: bool = True


# ---------------------------------------------------------------- parsing


def _normalize_key(key):
    return key.strip().lstrip("-").replace("-", "_").lower()


def parse_sweep(text, key="value"):
    """``lo:hi:logN``, ``lo:hi:linN``, a comma list or a single number."""
    text = str(text).strip()
    try:
        if ":" in text:
            lo, hi, spacing = text.split(":")
            lo, hi = float(lo), float(hi)
            if spacing.startswith("log"):
                n = int(spacing[3:])
                if lo <= 0 or hi <= 0:
                    raise ConfigError(key, "log sweep bounds must be positive")
                return np.geomspace(lo, hi, n)
            if spacing.startswith("lin"):
                return np.linspace(lo, hi, int(spacing[3:]))
            raise ConfigError(key, f"sweep spacing must be logN or linN, got {spacing!r}")
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise ConfigError(key, f"cannot parse {text!r}") from exc


def read_config(path) -> dict:
    """Key-value pairs from a config file or from a previous output file.

    Accepts ``key = value`` lines, optionally behind ``#``.  Reading stops
    at the first CSV row so a table written by this tool can be fed back.
    A JSON output file is read through its ``meta.config`` entry.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return dict(json.loads(text)["meta"]["config"])
    out = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        body = line.lstrip("#").strip()
        if "=" not in body:
            if line.startswith("#"):
                continue
            break
        key, value = body.split("=", 1)
        out[_normalize_key(key)] = value.strip()
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    merged = {}
    if args.config:
        merged.update(read_config(args.config))
    for key in PARAMETERS:
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    for key in ("output", "format", "threads"):
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v

    command = args.command or merged.get("command")
    if command is None:
        raise ConfigError("command", "no command given")
    if command not in COMMANDS:
        raise ConfigError("command", f"unknown command {command!r}")
    unknown = sorted(k for k in merged if k not in PARAMETERS and k not in META_KEYS and k not in RUN_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")

    params = {}
    for key, (_, kind) in PARAMETERS.items():
        if key not in merged or merged[key] in (None, "", "None"):
            continue
        raw = merged[key]
        if kind == "float":
            try:
                params[key] = float(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(key, f"not a number: {raw!r}") from exc
        elif kind == "int":
            try:
                params[key] = int(float(raw))
            except (TypeError, ValueError) as exc:
                raise ConfigError(key, f"not an integer: {raw!r}") from exc
        else:
            params[key] = str(raw)
    fmt = merged.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("format", f"must be csv or json, got {fmt!r}")
    threads = merged.get("threads")
    if threads is None:
        threads = os.environ.get("SQZ_THREADS")
    if threads is not None:
        try:
            threads = int(threads)
        except ValueError as exc:
            raise ConfigError("threads", f"not an integer: {threads!r}") from exc
        if threads < 1:
            raise ConfigError("threads", "must be at least 1")
    cfg = RunConfig(command, params, merged.get("output"), fmt, threads)
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig):
    v = cfg.value
    if not v("c") > 0:
        raise ConfigError("c", "cooperativity must be positive")
    if not 0 < v("rho") < 1:
        raise ConfigError("rho", "must lie in (0, 1)")
    if not v("n") >= 1:
        raise ConfigError("n", "atom number must be at least 1")
    if not v("grid") >= 3:
        raise ConfigError("grid", "must be at least 3")
    hz = v("gamma0_hz")
    if hz is not None and not hz > 0:
        raise ConfigError("gamma0_hz", "must be positive")
    for key in ("gamma_p_prime", "amplitude", "omega", "c_values"):
        arr = parse_sweep(v(key), key)
        if np.any(arr < 0) or np.any(~np.isfinite(arr)):
            raise ConfigError(key, "rates must be non-negative")
    gp = str(v("gamma_p")).strip()
    if gp != "opt":
        if np.any(parse_sweep(gp, "gamma_p") < 0):
            raise ConfigError("gamma_p", "rates must be non-negative")
    if v("field") < 0:
        raise ConfigError("field", "amplitude must be non-negative")


# ---------------------------------------------------------------- commands


def _rate_scale(cfg):
    hz = cfg.value("gamma0_hz")
    return 1.0 if hz is None else float(hz)


def _rate(cfg, key):
    return float(cfg.value(key)) / _rate_scale(cfg)


def _rates(cfg, key):
    return parse_sweep(cfg.value(key), key) / _rate_scale(cfg)


def _single(cfg, key):
    values = _rates(cfg, key)
    if values.size != 1:
        raise ConfigError(key, f"{cfg.command} takes a single value, not a sweep")
    return float(values[0])


def _effective(cfg, gp, gq, **kw):
    return EffectiveParams.from_rates(
        cfg.value("c"),
        cfg.value("rho"),
        gp,
        gq,
        N=cfg.value("n"),
        delta_tilde=_rate(cfg, "delta_tilde"),
        Delta_c=_rate(cfg, "delta_c"),
        **kw,
    )


def _variance_row(args):
    cfg, gp, gq = args
    ep = _effective(cfg, gp, gq)
    field_amp = _rate(cfg, "field")
    if field_amp and ep.g_tilde == 0:
        raise ConfigError("field", "a mean field needs a non-zero Raman pumping rate")
    a2 = field_amp * ep.gamma0 / ep.g_tilde if field_amp else 0.0
    rep, cov, _ = variance_pipeline(ep, a2)
    var_sy = cov.spin_covariance[1, 1]
    return {
        "Gamma_p": gp,
        "Gamma_p_prime": gq,
        "dS_min": rep.dS_min,
        "var_sy_norm": var_sy / (ep.N / 4),
        "spin_half_norm": rep.spin_half / (ep.N / 4),
        "squeezing_db": rep.squeezing_db,
        "angle": rep.angle,
    }


def _pool_map(cfg, fn, items):
    workers = cfg.threads or os.cpu_count() or 1
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def cmd_variance(cfg):
    rows = [_variance_row((cfg, _single(cfg, "gamma_p"), _single(cfg, "gamma_p_prime")))]
    return Table(list(rows[0]), rows)


def cmd_scan_gamma(cfg):
    gq_values = _rates(cfg, "gamma_p_prime")
    if str(cfg.value("gamma_p")).strip() == "opt":
        ratio = cfg.value("c") ** (-1 / 3)
        pairs = [(ratio * q, q) for q in gq_values]
    else:
        pairs = [(p, q) for p in _rates(cfg, "gamma_p") for q in gq_values]
    rows = _pool_map(cfg, _variance_row, [(cfg, p, q) for p, q in pairs])
    return Table(list(rows[0]), rows)


def cmd_optimize(cfg):
    c, rho = cfg.value("c"), cfg.value("rho")
    opt = optimize_pumps(c, rho, grid=cfg.value("grid"))
    asym = asymptotic_pumps(c, rho)
    row = {
        "C": c,
        "rho": rho,
        "Gamma_p_star": opt.Gamma_p_star,
        "Gamma_p_prime_star": opt.Gamma_p_prime_star,
        "dS_min_star": opt.dS_min_star,
        "squeezing_percent": 100 * opt.squeezing,
        "squeezing_db": opt.squeezing_db,
        "at_boundary": opt.at_boundary,
        "evaluations": opt.evaluations,
        "Gamma_p_star_asymptotic": asym.Gamma_p_star,
        "Gamma_p_prime_star_asymptotic": asym.Gamma_p_prime_star,
    }
    return Table(list(row), [row])


def cmd_scaling(cfg):
    study = scaling_study(parse_sweep(cfg.value("c_values"), "c_values"), cfg.value("rho"), grid=cfg.value("grid"))
    rows = [
        {
            "C": c,
            "Gamma_p_star": o.Gamma_p_star,
            "Gamma_p_prime_star": o.Gamma_p_prime_star,
            "dS_min_star": o.dS_min_star,
            "squeezing_db": o.squeezing_db,
            "prefactor": o.dS_min_star * c ** (1 / 3),
        }
        for c, o in zip(study.C.tolist(), study.optima)
    ]
    meta = {
        "slope": study.slope,
        "prefactor": study.prefactor,
        "large_c_prefactor": study.large_c_prefactor,
    }
    return Table(list(rows[0]), rows, meta)


def cmd_spectrum(cfg):
    ep = _effective(cfg, _single(cfg, "gamma_p"), _single(cfg, "gamma_p_prime"))
    w = parse_sweep(cfg.value("omega"), "omega")
    points = spectrum_analytic(ep, w)
    matrix = spin_spectrum(noise_model(ep), w, gamma0=ep.gamma0)
    rows = [
        {"omega_bar": p.omega_bar, "S_f": p.S_f, "S_at": p.S_at, "total": p.total, "total_matrix": float(m)}
        for p, m in zip(points, matrix)
    ]
    meta = {"gamma_plus": ep.gamma_plus, "width": 2 * ep.gamma_plus}
    return Table(list(rows[0]), rows, meta)


def cmd_field_scan(cfg):
    ep = _effective(cfg, _single(cfg, "gamma_p"), _single(cfg, "gamma_p_prime"))
    amps = _rates(cfg, "amplitude")
    points = field_scan(ep, amps)
    rows = [{"amplitude": p.amplitude, "dS_min": p.dS_min, "stable": p.stable, "angle": p.angle} for p in points]
    return Table(list(rows[0]), rows, {"field_limit": field_limit(ep)})


def cmd_validate(cfg):
    from .validate import run_all

    results = run_all()
    rows = [
        {"check": r.name, "passed": r.passed, "value": r.value, "tolerance": r.tolerance, "detail": r.detail}
        for r in results
    ]
    return Table(list(rows[0]), rows, ok=all(r.passed for r in results))


HANDLERS = {
    "variance": cmd_variance,
    "scan-gamma": cmd_scan_gamma,
    "optimize": cmd_optimize,
    "scaling": cmd_scaling,
    "spectrum": cmd_spectrum,
    "field-scan": cmd_field_scan,
    "validate": cmd_validate,
}


# ---------------------------------------------------------------- output


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def _to_output_units(cfg, table):
    scale = _rate_scale(cfg)
    if scale == 1.0:
        return table
    rows = [{k: (v * scale if k in RATE_COLUMNS else v) for k, v in r.items()} for r in table.rows]
    meta = {k: (v * scale if k in RATE_COLUMNS else v) for k, v in table.meta.items()}
    return Table(table.columns, rows, meta, table.ok)


def header_items(cfg: RunConfig):
    items = [
        ("command", cfg.command),
        ("version", VERSION),
        ("figure", FIGURES[cfg.command]),
        ("format", cfg.format),
    ]
    for key in PARAMETERS:
        value = cfg.parameters.get(key, PARAMETERS[key][0])
        if value is None:
            continue
        items.append((key, _fmt(value)))
    return items


def render(cfg: RunConfig, table: Table) -> str:
    table = _to_output_units(cfg, table)
    if cfg.format == "json":
        config = {k: v for k, v in header_items(cfg) if k not in ("version", "figure")}
        meta = {
            "version": VERSION,
            "figure": FIGURES[cfg.command],
            "config": config,
            **{k: _json_value(v) for k, v in table.meta.items()},
        }
        rows = [{k: _json_value(r[k]) for k in table.columns} for r in table.rows]
        return json.dumps({"meta": meta, "rows": rows}, indent=2) + "\n"
    buf = io.StringIO()
    for key, value in header_items(cfg):
        buf.write(f"# {key} = {value}\n")
    for key, value in table.meta.items():
        buf.write(f"# result {key}: {_fmt(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for r in table.rows:
        writer.writerow([_fmt(r[k]) for k in table.columns])
    return buf.getvalue()


def run(cfg: RunConfig) -> tuple[int, str]:
    table = HANDLERS[cfg.command](cfg)
    text = render(cfg, table)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return (0 if table.ok else 1), text


# ---------------------------------------------------------------- entry


def _add_run_options(p, default):
    # Accepted before and after the command; the sub-command copy must not
    # overwrite a value given before it, hence SUPPRESS there.
    p.add_argument("--config", default=default, help="key = value file, or a table written earlier")
    p.add_argument("-o", "--output", default=default, help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=default)
    p.add_argument("--threads", type=int, default=default, help="worker threads (default: SQZ_THREADS or all cores)")


def _add_common(p):
    _add_run_options(p, argparse.SUPPRESS)
    p.add_argument("--c", type=str, default=None, help="cooperativity")
    p.add_argument("--rho", type=str, default=None, help="gamma0 / kappa")
    p.add_argument("--gamma-p", dest="gamma_p", default=None, help="Raman pumping rate, sweep or 'opt'")
    p.add_argument("--gamma-p-prime", dest="gamma_p_prime", default=None, help="EIT pumping rate or sweep")
    p.add_argument("--n", default=None, help="atom number")
    p.add_argument("--delta-tilde", dest="delta_tilde", default=None, help="two-photon detuning")
    p.add_argument("--delta-c", dest="delta_c", default=None, help="cavity detuning")
    p.add_argument("--field", default=None, help="mean field amplitude |g~ <A2>|")
    p.add_argument("--omega", default=None, help="omega / kappa sweep for spectra")
    p.add_argument("--amplitude", default=None, help="field amplitude sweep")
    p.add_argument("--c-values", dest="c_values", default=None, help="cooperativity sweep for scaling")
    p.add_argument("--grid", default=None, help="coarse grid size of the optimizer")
    p.add_argument("--gamma0-hz", dest="gamma0_hz", default=None, help="gamma0 in absolute units")


def make_parser():
    parser = argparse.ArgumentParser(
        prog="eitsqueeze",
        description="Steady-state spin squeezing by EIT and Raman pumping in a cavity.",
    )
    sub = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        _add_common(sub.add_parser(name, help=FIGURES[name]))
    _add_run_options(parser, None)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if args.command is None and not args.config:
        parser.print_help(sys.stderr)
        return 2
    try:
        cfg = build_config(args)
        status, text = run(cfg)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NonStationaryError, ConvergenceError, UndefinedSpinError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    if not cfg.output_path:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
