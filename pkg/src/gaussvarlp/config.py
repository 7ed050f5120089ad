"""JSON declarations of exponents, profiles, fields and operator specs.

Every parser takes the dotted path of the entry it reads so that
validation errors name the failing field, e.g. ``spec.profile.coeffs``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from gaussvarlp.errors import ConfigError, GaussVarLpError

__all__ = [
    "load_config",
    "parse_exponent",
    "parse_profile",
    "parse_field",
    "parse_spec",
    "parse_point",
    "parse_lambdas",
    "DEFAULT_EXPONENT",
    "DEFAULT_PROFILE",
]

DEFAULT_EXPONENT = {"family": "constant", "p": 2.0}
DEFAULT_PROFILE = {"hermite": [[1, 0]], "coeffs": [0.5]}


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be an object")
    return cfg


def _obj(cfg, path):
    if isinstance(cfg, str):
        try:
            cfg = json.loads(cfg)
        except json.JSONDecodeError as exc:
            raise ConfigError(path, f"invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(path, "expected an object")
    return cfg


def _number(cfg, key, path, default=None, positive=False):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing")
        return default
    val = cfg[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ConfigError(f"{path}.{key}", f"expected a finite number, got {val!r}")
    if positive and val <= 0:
        raise ConfigError(f"{path}.{key}", "must be positive")
    return float(val)


def _int(cfg, key, path, default=None, minimum=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing")
        return default
    val = cfg[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or int(val) != val:
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {val!r}")
    if minimum is not None and val < minimum:
        raise ConfigError(f"{path}.{key}", f"must be >= {minimum}")
    return int(val)


def _vector(val, d, path):
    try:
        arr = np.asarray(val, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, f"expected a list of numbers: {exc}") from exc
    if arr.shape != (d,) or not np.all(np.isfinite(arr)):
        raise ConfigError(path, f"expected {d} finite numbers, got {val!r}")
    return arr


def _wrap(path, fn, *args, **kwargs):
    """Re-raise library errors with the config path attached."""
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except (GaussVarLpError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_exponent(cfg, d: int, path: str = "exponent"):
    """``{"family": "constant", "p": 2}``, ``{"family": "radial_rational",
    "p_inf": 2, "amplitude": 1}`` or ``{"family": "expression", "source": ...}``.
    """
    from gaussvarlp import exponents as ex

    cfg = _obj(cfg, path)
    family = cfg.get("family")
    if family == "constant":
        p = _number(cfg, "p", path)
        if p < 1:
            raise ConfigError(f"{path}.p", "exponent must be >= 1")
        return ex.constant_exponent(p)
    if family == "radial_rational":
        p_inf = _number(cfg, "p_inf", path)
        amp = _number(cfg, "amplitude", path, 1.0)
        if min(p_inf, p_inf + amp) < 1:
            raise ConfigError(path, "exponent must stay >= 1")
        return ex.radial_rational_exponent(p_inf, amp)
    if family == "expression":
        src = cfg.get("source")
        if not isinstance(src, str):
            raise ConfigError(f"{path}.source", "expected a string")
        kw = {k: _number(cfg, k, path) for k in ("p_inf", "c_gamma", "lh0_const")
              if k in cfg}
        p = _wrap(f"{path}.source", ex.expression_exponent, src, d, **kw)
        if p.p_minus < 1:
            raise ConfigError(f"{path}.source", "exponent must be >= 1 on the samples")
        return p
    raise ConfigError(f"{path}.family",
                      f"expected constant, radial_rational or expression, got {family!r}")


def parse_profile(cfg, d: int, path: str = "profile"):
    """``{"hermite": [[1, 0]], "coeffs": [1.0]}``, ``{"expression": "x1"}`` or a
    bare expression string."""
    from gaussvarlp.kernels import expression_profile, hermite_profile

    if isinstance(cfg, str) and not cfg.lstrip().startswith("{"):
        return _wrap(path, expression_profile, cfg, d)
    cfg = _obj(cfg, path)
    if "hermite" in cfg:
        idx = cfg["hermite"]
        coeffs = cfg.get("coeffs", [1.0] * len(idx) if isinstance(idx, list) else None)
        if not isinstance(idx, list) or not all(isinstance(a, list) for a in idx):
            raise ConfigError(f"{path}.hermite", "expected a list of multi-indices")
        if not isinstance(coeffs, list) or len(coeffs) != len(idx):
            raise ConfigError(f"{path}.coeffs", "expected one coefficient per multi-index")
        if any(len(a) != d for a in idx):
            raise ConfigError(f"{path}.hermite", f"multi-indices must have length {d}")
        return _wrap(path, hermite_profile, idx, coeffs, d)
    if "expression" in cfg:
        if not isinstance(cfg["expression"], str):
            raise ConfigError(f"{path}.expression", "expected a string")
        return _wrap(f"{path}.expression", expression_profile, cfg["expression"], d)
    raise ConfigError(path, "expected a 'hermite' or 'expression' entry")


def parse_field(cfg, d: int, path: str = "field"):
    """Field declarations keyed by ``kind``.

    ``constant`` (value), ``hermite`` (alpha, kappa, center), ``bump``
    (center, width, amplitude), ``ball`` (center, radius, value),
    ``expression`` (source, kappa, center, support) and ``sum`` (terms, each
    with an optional ``scale``).
    """
    from gaussvarlp import fields as fl

    cfg = _obj(cfg, path)
    kind = cfg.get("kind")
    zero = [0.0] * d
    if kind == "constant":
        return fl.constant_field(_number(cfg, "value", path, 1.0), d)
    if kind == "hermite":
        alpha = cfg.get("alpha")
        if not isinstance(alpha, list) or len(alpha) != d or \
                not all(isinstance(a, int) and a >= 0 for a in alpha):
            raise ConfigError(f"{path}.alpha", f"expected {d} nonnegative integers")
        kappa = _number(cfg, "kappa", path, 0.0)
        if kappa < 0:
            raise ConfigError(f"{path}.kappa", "must be nonnegative")
        center = _vector(cfg.get("center", zero), d, f"{path}.center")
        return fl.hermite_field(alpha, kappa, center)
    if kind == "bump":
        center = _vector(cfg.get("center", zero), d, f"{path}.center")
        return fl.gaussian_bump(center, _number(cfg, "width", path, positive=True),
                                _number(cfg, "amplitude", path, 1.0))
    if kind == "ball":
        center = _vector(cfg.get("center", zero), d, f"{path}.center")
        return fl.ball_indicator(center, _number(cfg, "radius", path, positive=True),
                                 _number(cfg, "value", path, 1.0))
    if kind == "expression":
        src = cfg.get("source")
        if not isinstance(src, str):
            raise ConfigError(f"{path}.source", "expected a string")
        kappa = _number(cfg, "kappa", path, 0.0)
        if kappa < 0:
            raise ConfigError(f"{path}.kappa", "must be nonnegative")
        center = _vector(cfg.get("center", zero), d, f"{path}.center")
        support = None
        if cfg.get("support") is not None:
            s = _obj(cfg["support"], f"{path}.support")
            support = fl.Ball(_vector(s.get("center", zero), d, f"{path}.support.center"),
                              _number(s, "radius", f"{path}.support", positive=True))
        return _wrap(f"{path}.source", fl.expression_field, src, d, kappa, center, support)
    if kind == "sum":
        terms = cfg.get("terms")
        if not isinstance(terms, list) or not terms:
            raise ConfigError(f"{path}.terms", "expected a nonempty list")
        parsed = []
        for i, t in enumerate(terms):
            tp = f"{path}.terms[{i}]"
            t = _obj(t, tp)
            f = parse_field(t, d, tp)
            if isinstance(f, fl.FieldSum):
                parsed.extend(f.terms)
            else:
                parsed.append(f.scaled(_number(t, "scale", tp)) if "scale" in t else f)
        return fl.FieldSum(parsed)
    raise ConfigError(f"{path}.kind",
                      "expected constant, hermite, bump, ball, expression or sum, "
                      f"got {kind!r}")


_SPEC_INTS = ("inner_order", "tau_panels", "t_order", "w_order", "n_radial", "n_angular")
_SPEC_FLOATS = ("outer_tol", "t_min")


def parse_spec(cfg, path: str = "spec", overrides: dict | None = None):
    """Operator spec: ``variant``, ``m``, ``d``, ``profile``, ``scale_const`` and
    the quadrature settings of :class:`~gaussvarlp.operators.OperatorSpec`."""
    from gaussvarlp.operators import OperatorSpec

    cfg = dict(_obj(cfg, path))
    cfg.update(overrides or {})
    variant = cfg.get("variant", "alternative")
    if variant not in ("general", "alternative"):
        raise ConfigError(f"{path}.variant", f"expected general or alternative, got {variant!r}")
    d = _int(cfg, "d", path, 2, minimum=1)
    m = _int(cfg, "m", path, 2, minimum=1)
    F = parse_profile(cfg.get("profile", DEFAULT_PROFILE), d, f"{path}.profile")
    kw = {k: _int(cfg, k, path, minimum=1) for k in _SPEC_INTS if k in cfg}
    kw.update({k: _number(cfg, k, path, positive=True) for k in _SPEC_FLOATS if k in cfg})
    if cfg.get("scale_const") is not None:
        kw["scale_const"] = _number(cfg, "scale_const", path, positive=True)
    return _wrap(path, OperatorSpec, variant, F, m, d, **kw)


def parse_point(text, d: int, path: str = "at") -> np.ndarray:
    """``"x1,x2"`` or a list of numbers."""
    if isinstance(text, str):
        try:
            text = [float(v) for v in text.split(",")]
        except ValueError as exc:
            raise ConfigError(path, f"cannot parse point {text!r}") from exc
    return _vector(text, d, path)


def parse_lambdas(text, path: str = "lambdas") -> np.ndarray:
    """``"log:a:b:n"`` (n log-spaced values), ``"a,b,c"`` or a list."""
    if isinstance(text, str) and text.startswith("log:"):
        parts = text.split(":")
        try:
            a, b, n = float(parts[1]), float(parts[2]), int(parts[3])
        except (IndexError, ValueError) as exc:
            raise ConfigError(path, f"expected log:a:b:n, got {text!r}") from exc
        if not (0 < a < b) or n < 2:
            raise ConfigError(path, "need 0 < a < b and n >= 2")
        return np.geomspace(a, b, n)
    if isinstance(text, str):
        try:
            text = [float(v) for v in text.split(",")]
        except ValueError as exc:
            raise ConfigError(path, f"cannot parse {text!r}") from exc
    arr = np.asarray(text, dtype=float)
    if arr.ndim != 1 or arr.size == 0 or np.any(~(arr > 0)):
        raise ConfigError(path, "expected positive numbers")
    return arr
