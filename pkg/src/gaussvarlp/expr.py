"""Compile user arithmetic expressions in ``x1..xd`` into vectorised callables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import sympy as sp

from gaussvarlp.errors import ConfigError

_ALLOWED_FUNCS = {
    name: getattr(sp, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "Abs", "tanh",
                 "sinh", "cosh", "atan", "pi", "E")
}
_ALLOWED_FUNCS["abs"] = sp.Abs


@dataclass(frozen=True)
class CompiledExpression:
    source: str
    d: int
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    expr: sp.Expr

    def __call__(self, points):
        return self.value(points)


def _broadcast(fn, n_out=None):
    def wrapped(points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        cols = [pts[:, i] for i in range(pts.shape[1])]
        with np.errstate(all="ignore"):
            out = fn(*cols)
        if n_out is None:
            return np.broadcast_to(np.asarray(out, dtype=float), (pts.shape[0],)).copy()
        return np.stack([np.broadcast_to(np.asarray(o, dtype=float), (pts.shape[0],))
                         for o in out], axis=-1)
    return wrapped


def compile_expression(source: str, d: int, field: str = "source") -> CompiledExpression:
    """Parse ``source`` with variables ``x1..xd`` (``r`` is ``|x|``).

    Raises
    ------
    ConfigError
        If the expression does not parse or uses unknown symbols.
    """
    symbols = sp.symbols(" ".join(f"x{i + 1}" for i in range(d)), real=True)
    symbols = tuple(np.atleast_1d(symbols))
    local = dict(_ALLOWED_FUNCS)
    local.update({str(s): s for s in symbols})
    local["r"] = sp.sqrt(sum(s**2 for s in symbols))
    try:
        expr = sp.sympify(source, locals=local, convert_xor=True)
    except (sp.SympifyError, TypeError, SyntaxError) as exc:
        raise ConfigError(field, f"cannot parse expression {source!r}") from exc
    unknown = expr.free_symbols - set(symbols)
    if unknown:
        raise ConfigError(field, f"unknown symbols {sorted(map(str, unknown))}")
    value = _broadcast(sp.lambdify(symbols, expr, "numpy"))
    grad_exprs = [sp.diff(expr, s) for s in symbols]
    gradient = _broadcast(sp.lambdify(symbols, grad_exprs, "numpy"), n_out=d)
    return CompiledExpression(source, d, value, gradient, expr)
