"""Command-line experiment driver.

Each subcommand resolves its settings from built-in defaults, then an
optional ``--config`` JSON file, then explicit flags (flags win). The fully
resolved settings are echoed in the JSON report, so a report can be rerun
as a config file. Exit status: 0 success, 2 numerical flags raised, 1 error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from gaussvarlp import SCHEMA
from gaussvarlp.config import (DEFAULT_EXPONENT, DEFAULT_PROFILE, load_config,
                               parse_exponent, parse_field, parse_lambdas, parse_point,
                               parse_profile, parse_spec)
from gaussvarlp.errors import ConfigError, GaussVarLpError

__all__ = ["main", "run", "COMMANDS", "build_parser"]

EXIT_OK, EXIT_ERROR, EXIT_FLAGS = 0, 1, 2

_DEFAULT_SPEC = {"variant": "alternative", "m": 2, "d": 2, "profile": DEFAULT_PROFILE}
_DEFAULT_FIELD = {"kind": "bump", "center": [2.0, 0.0], "width": 0.2}

DEFAULTS: dict[str, dict] = {
    "check-exponent": {"exponent": DEFAULT_EXPONENT, "d": 2, "r_max": 50.0,
                       "n_radial": 1000, "grid_n": None, "seed": 0},
    "norm": {"exponent": DEFAULT_EXPONENT, "field": {"kind": "constant", "value": 1.0},
             "d": 2, "scheme": None, "gh_order": None},
    "kernel-sweep": {"spec": _DEFAULT_SPEC, "eps": 0.1, "regime": "b_gt_0", "n": 1000,
                     "seed": 0},
    "bounds": {"spec": _DEFAULT_SPEC, "eps": [0.1, 0.3], "n": 10000, "n_small": 1000,
               "seed": 0, "tol": 0.05},
    "apply": {"spec": _DEFAULT_SPEC, "field": _DEFAULT_FIELD, "at": [0.0, 0.0],
              "part": "full"},
    "opnorm": {"spec": _DEFAULT_SPEC, "exponent": DEFAULT_EXPONENT,
               "family": "standard10", "gh_order": 64, "prune": 1e-18},
    "weaktype": {"spec": {**_DEFAULT_SPEC, "m": 1}, "field": _DEFAULT_FIELD,
                 "lambdas": "log:0.001:10:20", "grid_n": 256, "radius": 5.0},
    "covering": {"cover_radius": 4.0, "scale_const": 2.0, "d": 2, "grid_n": 400},
    "theta": {"profile": {"expression": "x1**2*x2**2 - 1/4"}, "d": 2,
              "t": [1.0, 2.0, 4.0], "seed": 0},
}
COMMANDS = tuple(DEFAULTS)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _tolist(text, path, cast=float):
    if isinstance(text, (list, tuple)):
        return [cast(v) for v in text]
    if isinstance(text, (int, float)):
        return [cast(text)]
    try:
        return [cast(v) for v in str(text).split(",")]
    except ValueError as exc:
        raise ConfigError(path, f"cannot parse list {text!r}") from exc


def _ndim(cfg, key="d"):
    d = cfg.get(key, 2)
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise ConfigError(key, f"expected a positive integer, got {d!r}")
    return d


# command implementations: resolved config -> (results, flags, csv rows or None)

def _cmd_check_exponent(cfg):
    from gaussvarlp import exponents as ex

    d = _ndim(cfg)
    p = parse_exponent(cfg["exponent"], d)
    samples = ex.default_samples(d, grid_n=cfg["grid_n"], n_radial=int(cfg["n_radial"]),
                                 r_max=float(cfg["r_max"]), seed=int(cfg["seed"]))
    nonzero = samples[np.any(samples != 0, axis=1)]
    pairs = ex.grid_pairs(d)
    res = {
        "p_minus": p.p_minus, "p_plus": p.p_plus, "p_inf": p.p_inf,
        "LH0": ex.check_lh0(p, pairs).to_dict(),
        "LH0_reciprocal": ex.check_lh0(lambda x: 1.0 / p(x), pairs).to_dict(),
        "LHinf": ex.check_lh_infinity(p, samples=samples, alpha_inf=p.p_inf).to_dict(),
        "P_gamma_inf": ex.check_p_gamma_inf(p, nonzero).to_dict(),
    }
    if p.p_minus > 1:
        res["dual_p_inf"] = float(ex.conjugate(p.p_inf))
        try:
            res["equivalence"] = ex.lemma_equiv_constants(p, samples).to_dict()
        except GaussVarLpError as exc:
            res["equivalence"] = {"error": str(exc)}
    return res, [], None


def _scheme(cfg, d):
    from gaussvarlp.quadrature import gauss_hermite_tensor, parse_scheme

    if cfg.get("gh_order") is not None:
        return gauss_hermite_tensor(d, int(cfg["gh_order"]))
    if cfg.get("scheme") is not None:
        return parse_scheme(cfg["scheme"], d)
    return parse_scheme("gh", d)


def _cmd_norm(cfg):
    from gaussvarlp.varlebesgue import luxemburg_norm, modular

    d = _ndim(cfg)
    p = parse_exponent(cfg["exponent"], d)
    f = parse_field(cfg["field"], d)
    sch = _scheme(cfg, d)
    res = luxemburg_norm(p, f, sch, estimate_error=True)
    mod = modular(f, p, sch)
    out = res.to_dict()
    out["modular"] = mod.to_dict()
    out["scheme"] = sch.describe()
    return out, [], None


def _sweep(cfg, spec, eps, n, regime, seed):
    from gaussvarlp.kernels import bound_ratios, sample_global_pairs

    x, y = sample_global_pairs(n, spec.d, regime, seed, spec.scale_const)
    ratio, b, kern, bound = bound_ratios(x, y, spec.F, spec.m, eps, spec.variant,
                                         spec.scale_const)
    return x, y, ratio, kern, bound


def _cmd_kernel_sweep(cfg):
    spec = parse_spec(cfg["spec"])
    regime = cfg["regime"]
    if regime not in ("b_le_0", "b_gt_0"):
        raise ConfigError("regime", "expected b_le_0 or b_gt_0")
    n = int(cfg["n"])
    if n < 1:
        raise ConfigError("n", "must be positive")
    eps = float(cfg["eps"])
    x, y, ratio, kern, bound = _sweep(cfg, spec, eps, n, regime, int(cfg["seed"]))
    header = [f"x{i + 1}" for i in range(spec.d)] + [f"y{i + 1}" for i in range(spec.d)] \
        + ["value", "bound", "ratio"]
    rows = [header] + [[*xi, *yi, k, bd, r] for xi, yi, k, bd, r
                       in zip(x, y, kern, bound, ratio)]
    k = int(np.argmax(ratio))
    res = {"regime": regime, "eps": eps, "n": n, "max_ratio": float(ratio[k]),
           "argmax": {"x": x[k], "y": y[k]}, "max_abs_kernel": float(np.max(np.abs(kern)))}
    flags = [] if np.all(np.isfinite(ratio)) else ["non-finite ratio"]
    return res, flags, rows


def _cmd_bounds(cfg):
    spec = parse_spec(cfg["spec"])
    n, n_small = int(cfg["n"]), int(cfg["n_small"])
    if not 0 < n_small <= n:
        raise ConfigError("n_small", "need 0 < n_small <= n")
    tol = float(cfg["tol"])
    out, flags = [], []
    for eps in _tolist(cfg["eps"], "eps"):
        for regime in ("b_le_0", "b_gt_0"):
            if regime == "b_gt_0" and not eps < 1.0 / spec.d:
                continue
            _, _, ratio, _, _ = _sweep(cfg, spec, eps, n, regime, int(cfg["seed"]))
            small, large = float(np.max(ratio[:n_small])), float(np.max(ratio))
            change = (large - small) / small if small > 0 else math.inf
            stable = bool(np.isfinite(large) and change < tol)
            if not stable:
                flags.append(f"unstable empirical constant (eps={eps}, {regime})")
            out.append({"eps": eps, "regime": regime, "C_eps_small": small,
                        "C_eps": large, "relative_change": change, "stable": stable})
    return {"n_small": n_small, "n": n, "tol": tol, "results": out}, flags, None


def _cmd_apply(cfg):
    from gaussvarlp.operators import evaluate

    spec = parse_spec(cfg["spec"])
    f = parse_field(cfg["field"], spec.d)
    part = cfg["part"]
    if part not in ("full", "local", "global"):
        raise ConfigError("part", "expected full, local or global")
    at = cfg["at"]
    pts = np.atleast_2d([parse_point(a, spec.d, f"at[{i}]") for i, a in enumerate(at)]
                        if at and isinstance(at[0], (list, str)) else
                        parse_point(at, spec.d))
    res = evaluate(spec, f, pts, part=part)
    return {"points": pts, "values": res.values, "error_estimate": res.error_estimate,
            "spec": spec.describe()}, list(res.flags), None


def _cmd_opnorm(cfg):
    from gaussvarlp.operators import operator_norm_estimate, standard_family
    from gaussvarlp.quadrature import gauss_hermite_tensor

    spec = parse_spec(cfg["spec"])
    p = parse_exponent(cfg["exponent"], spec.d)
    fam = cfg["family"]
    if isinstance(fam, str):
        family = standard_family(fam, spec.d)
    elif isinstance(fam, list) and fam:
        family = [parse_field(f, spec.d, f"family[{i}]") for i, f in enumerate(fam)]
    else:
        raise ConfigError("family", "expected a family name or a list of fields")
    sch = gauss_hermite_tensor(spec.d, int(cfg["gh_order"]), float(cfg["prune"]))
    est = operator_norm_estimate(spec, p, family, sch)
    return {**est.to_dict(), "scheme_nodes": sch.size}, list(est.flags), None


def _cmd_weaktype(cfg):
    from gaussvarlp.operators import distribution_function
    from gaussvarlp.quadrature import truncated_uniform

    spec = parse_spec(cfg["spec"])
    f = parse_field(cfg["field"], spec.d)
    lam = parse_lambdas(cfg["lambdas"])
    grid = truncated_uniform(spec.d, float(cfg["radius"]), int(cfg["grid_n"]))
    rep = distribution_function(spec, f, lam, grid)
    rows = [["lambda", "measure", "weak_ratio"]] + [
        [a, b, c] for a, b, c in zip(rep.lambdas, rep.measures, rep.weak_ratios)]
    return rep.to_dict(), list(rep.flags), rows


def _cmd_covering(cfg):
    from gaussvarlp.geometry import build_covering

    d = _ndim(cfg)
    fam = build_covering(float(cfg["cover_radius"]), float(cfg["scale_const"]), d)
    cert = fam.verify(int(cfg["grid_n"]))
    flags = []
    if not cert.covers:
        flags.append("coverage gap")
    if not cert.equivalence_certified:
        flags.append("gaussian equivalence not certified")
    return {"n_balls": len(fam), "certificate": cert.to_dict(),
            "balls": json.loads(fam.to_json())}, flags, None


def _cmd_theta(cfg):
    from gaussvarlp.kernels import theta_profile

    d = _ndim(cfg)
    F = parse_profile(cfg["profile"], d)
    vals = theta_profile(F, _tolist(cfg["t"], "t"), seed=int(cfg["seed"]))
    return {"profile": F.label, "theta": [v.to_dict() for v in vals],
            "unbounded_below": all(v.unbounded for v in vals)}, [], None


_HANDLERS = {
    "check-exponent": _cmd_check_exponent,
    "norm": _cmd_norm,
    "kernel-sweep": _cmd_kernel_sweep,
    "bounds": _cmd_bounds,
    "apply": _cmd_apply,
    "opnorm": _cmd_opnorm,
    "weaktype": _cmd_weaktype,
    "covering": _cmd_covering,
    "theta": _cmd_theta,
}

# flag name -> config key; config keys that take JSON declarations
_FLAG_KEYS = {"seed": "seed", "grid_n": "grid_n", "gh_order": "gh_order", "tol": "tol",
              "exponent": "exponent", "field": "field", "spec": "spec",
              "scheme": "scheme", "at": "at", "family": "family", "lambdas": "lambdas",
              "cover_radius": "cover_radius", "part": "part", "t": "t",
              "profile": "profile", "eps": "eps", "n": "n", "regime": "regime",
              "d": "d", "scale_const": "scale_const"}
_DECLS = ("exponent", "field", "spec", "profile")


def _declaration(value, key):
    """Inline JSON, ``@path`` to a JSON file, or (for profiles) an expression."""
    if not isinstance(value, str):
        return value
    if value.startswith("@"):
        return load_config(value[1:])
    if value.lstrip().startswith("{"):
        try:
            return json.loads(value)
        except json.JSONDecodeError as exc:
            raise ConfigError(key, f"invalid JSON: {exc}") from exc
    if key == "profile":
        return value
    raise ConfigError(key, "expected inline JSON or @file")


def resolve(command: str, file_cfg: dict | None = None, flags: dict | None = None) -> dict:
    """Defaults, then file values, then flags."""
    if command not in DEFAULTS:
        raise ConfigError("command", f"unknown command {command!r}")
    cfg = dict(DEFAULTS[command])
    for src in (file_cfg or {}, flags or {}):
        for k, v in src.items():
            if k in ("command", "out"):
                continue
            if k not in cfg:
                raise ConfigError(k, f"not a setting of {command}")
            cfg[k] = _declaration(v, k) if k in _DECLS else v
    if command == "apply" and isinstance(cfg["at"], str):
        cfg["at"] = [cfg["at"]]
    return cfg


def _tolerances(command, cfg):
    if "spec" in cfg:
        try:
            spec = parse_spec(cfg["spec"])
            return {"outer_tol": spec.outer_tol, "inner_order": spec.inner_order}
        except GaussVarLpError:
            return {}
    if command == "bounds":
        return {"relative_change": cfg["tol"]}
    return {}


def _csv_bytes(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                    for v in row])
    return buf.getvalue()


def run(command: str, file_cfg: dict | None = None, flags: dict | None = None,
        out_dir=None, stream=None) -> int:
    """Resolve, execute and report one command; returns the exit status."""
    stream = sys.stdout if stream is None else stream
    start = time.perf_counter()
    try:
        cfg = resolve(command, file_cfg, flags)
        results, num_flags, rows = _HANDLERS[command](cfg)
        tolerances = _tolerances(command, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (GaussVarLpError, ValueError, OSError) as exc:
        print(f"error: {command}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report = {"schema": SCHEMA, "command": command, "inputs_echo": cfg,
              "results": results, "flags": sorted(set(num_flags)),
              "tolerances": tolerances,
              "runtime": {"seconds": time.perf_counter() - start}}
    text = json.dumps(_jsonable(report), indent=2)
    try:
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{command}.json").write_text(text + "\n")
            if rows is not None:
                (out / f"{command}.csv").write_text(_csv_bytes(rows))
        else:
            print(text, file=stream)
    except OSError as exc:
        print(f"error: out: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_FLAGS if num_flags else EXIT_OK


def _add_common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out", help="directory for the JSON report and CSV output")
    p.add_argument("--seed", type=int)
    p.add_argument("--grid-n", dest="grid_n", type=int)
    p.add_argument("--gh-order", dest="gh_order", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--d", type=int)


_COMMAND_FLAGS = {
    "check-exponent": ["exponent"],
    "norm": ["exponent", "field", "scheme"],
    "kernel-sweep": ["spec", "eps", "n", "regime"],
    "bounds": ["spec", "eps", "n"],
    "apply": ["spec", "field", "at", "part"],
    "opnorm": ["spec", "exponent", "family"],
    "weaktype": ["spec", "field", "lambdas"],
    "covering": ["cover_radius", "scale_const"],
    "theta": ["profile", "t"],
}
_FLAG_TYPES = {"eps": str, "n": int, "cover_radius": float, "scale_const": float}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussvarlp",
        description="Gaussian singular integrals on variable Lebesgue spaces.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _add_common(p)
        for flag in _COMMAND_FLAGS[name]:
            p.add_argument("--" + flag.replace("_", "-"), dest=flag,
                           type=_FLAG_TYPES.get(flag, str))
    p = sub.add_parser("run", help="run the command named in the config file")
    p.add_argument("run_command", nargs="?", choices=COMMANDS)
    _add_common(p)
    # every command flag; resolve() rejects those the chosen command lacks
    for flag in sorted({f for fl in _COMMAND_FLAGS.values() for f in fl}):
        p.add_argument("--" + flag.replace("_", "-"), dest=flag,
                       type=_FLAG_TYPES.get(flag, str))
    return parser


def _flags_from(ns) -> dict:
    out = {}
    for key in _FLAG_KEYS:
        val = getattr(ns, key, None)
        if val is None:
            continue
        if key == "eps" and isinstance(val, str):
            val = [float(v) for v in val.split(",")]
            val = val[0] if len(val) == 1 else val
        out[key] = val
    return out


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        file_cfg = load_config(ns.config) if ns.config else {}
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    command = ns.command
    if command == "run":
        command = ns.run_command or file_cfg.get("command")
        if command not in COMMANDS:
            print(f"error: command: expected one of {', '.join(COMMANDS)}, "
                  f"got {command!r}", file=sys.stderr)
            return EXIT_ERROR
    elif file_cfg.get("command") not in (None, command):
        print(f"error: command: config is for {file_cfg['command']!r}", file=sys.stderr)
        return EXIT_ERROR
    flags = _flags_from(ns)
    # --d is only meaningful for commands without an operator spec
    if "d" in flags and "d" not in DEFAULTS[command]:
        print(f"error: d: set the dimension in the operator spec of {command}",
              file=sys.stderr)
        return EXIT_ERROR
    if "tol" in flags and "tol" not in DEFAULTS[command]:
        if "spec" in DEFAULTS[command]:
            spec = _declaration(flags.pop("spec", None) or file_cfg.get("spec")
                                or dict(DEFAULTS[command]["spec"]), "spec")
            flags["spec"] = {**spec, "outer_tol": flags.pop("tol")}
        else:
            print(f"error: tol: not a setting of {command}", file=sys.stderr)
            return EXIT_ERROR
    for key in ("grid_n", "gh_order", "seed"):
        if key in flags and key not in DEFAULTS[command]:
            print(f"error: {key}: not a setting of {command}", file=sys.stderr)
            return EXIT_ERROR
    out_dir = ns.out or file_cfg.get("out")
    return run(command, file_cfg, flags, out_dir)


if __name__ == "__main__":
    sys.exit(main())
