"""Scalar fields on ``R^d``.

A field is stored in the factored form

    f(y) = A(y) * exp(-kappa |y - c|^2) * 1_S(y),

with ``A`` smooth (often a polynomial), an optional Gaussian factor and an
optional hard ball cutoff ``S``. The operators exploit this structure:
the Gaussian factor is absorbed into the inner quadrature exactly and the
cutoff is integrated as a region rather than as a discontinuous integrand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.hermite import hermval

__all__ = [
    "Ball",
    "ScalarField",
    "FieldSum",
    "constant_field",
    "hermite_field",
    "gaussian_bump",
    "ball_indicator",
    "expression_field",
    "callable_field",
    "hermite_product",
]


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(points)
        return np.sum((pts - self.center) ** 2, axis=1) < self.radius**2

    def to_dict(self) -> dict:
        return {"center": np.asarray(self.center).tolist(), "radius": self.radius}


def hermite_product(alpha, points) -> np.ndarray:
    """``prod_i H_{alpha_i}(y_i)`` with physicists' Hermite polynomials."""
    pts = np.atleast_2d(points)
    out = np.ones(pts.shape[0])
    for i, k in enumerate(alpha):
        if k:
            c = np.zeros(k + 1)
            c[k] = 1.0
            out = out * hermval(pts[:, i], c)
    return out


@dataclass(frozen=True)
class ScalarField:
    """Real field in factored form; see the module docstring.

    Attributes
    ----------
    d : int
    amplitude : callable
        Smooth factor ``A``, vectorised over ``(n, d)`` arrays.
    kappa : float
        Gaussian factor rate; 0 disables it.
    center : ndarray
        Centre ``c`` of the Gaussian factor.
    support : Ball or None
        Hard cutoff.
    degree : int or None
        Polynomial degree of ``A`` when it is a polynomial.
    parity_hint : str
        ``"even"``, ``"odd"`` or ``"none"``.
    support_hint : float or None
        Radius outside which the field is negligible.
    """

    d: int
    amplitude: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    kappa: float = 0.0
    center: np.ndarray = None
    support: Ball | None = None
    degree: int | None = None
    parity_hint: str = "none"
    label: str = "field"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.center is None:
            object.__setattr__(self, "center", np.zeros(self.d))
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")

    @property
    def support_hint(self) -> float | None:
        if self.support is not None:
            return float(np.linalg.norm(self.support.center) + self.support.radius)
        if self.kappa > 0:
            return float(np.linalg.norm(self.center) + 6.0 / np.sqrt(self.kappa))
        return None

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        val = np.asarray(self.amplitude(pts), dtype=float)
        if self.kappa > 0:
            val = val * np.exp(-self.kappa * np.sum((pts - self.center) ** 2, axis=1))
        if self.support is not None:
            val = np.where(self.support.contains(pts), val, 0.0)
        return val

    def structure_key(self):
        sup = None if self.support is None else (
            tuple(self.support.center), self.support.radius)
        return (self.kappa, tuple(self.center) if self.kappa > 0 else None, sup)

    def scaled(self, c: float) -> "ScalarField":
        amp = self.amplitude
        return ScalarField(self.d, lambda x: c * amp(x), self.kappa, self.center,
                           self.support, self.degree, self.parity_hint,
                           f"{c}*{self.label}", self.params)

    def __mul__(self, c):
        return self.scaled(float(c))

    __rmul__ = __mul__

    def __add__(self, other):
        return FieldSum([self]) + other

    def describe(self) -> dict:
        out = {"label": self.label, "kappa": self.kappa, **self.params}
        if self.kappa > 0:
            out["center"] = self.center.tolist()
        if self.support is not None:
            out["support"] = self.support.to_dict()
        return out


class FieldSum:
    """Finite sum of fields, merged where the factored structure agrees."""

    def __init__(self, terms):
        merged: dict = {}
        for t in terms:
            key = t.structure_key()
            if key in merged:
                a, b = merged[key].amplitude, t.amplitude
                deg = (None if merged[key].degree is None or t.degree is None
                       else max(merged[key].degree, t.degree))
                prev = merged[key]
                merged[key] = ScalarField(t.d, lambda x, a=a, b=b: a(x) + b(x),
                                          t.kappa, t.center, t.support, deg,
                                          "none", f"{prev.label}+{t.label}")
            else:
                merged[key] = t
        self.terms = list(merged.values())
        self.d = self.terms[0].d

    def __call__(self, points):
        return sum(t(points) for t in self.terms)

    def __add__(self, other):
        extra = other.terms if isinstance(other, FieldSum) else [other]
        return FieldSum(self.terms + list(extra))

    def __mul__(self, c):
        return FieldSum([t.scaled(float(c)) for t in self.terms])

    __rmul__ = __mul__

    def describe(self) -> dict:
        return {"label": "sum", "terms": [t.describe() for t in self.terms]}


def constant_field(value: float, d: int) -> ScalarField:
    value = float(value)
    return ScalarField(d, lambda x: np.full(x.shape[0], value), degree=0,
                       parity_hint="even", label=f"const({value})",
                       params={"kind": "constant", "value": value})


def hermite_field(alpha, kappa: float = 0.0, center=None) -> ScalarField:
    """``H_alpha(y) exp(-kappa |y - c|^2)``."""
    alpha = tuple(int(a) for a in alpha)
    parity = "even" if sum(alpha) % 2 == 0 else "odd"
    if kappa > 0 and center is not None and np.any(np.asarray(center) != 0):
        parity = "none"
    return ScalarField(len(alpha), lambda x: hermite_product(alpha, x), float(kappa),
                       center, None, sum(alpha), parity,
                       f"H{list(alpha)}" + (f"*g({kappa})" if kappa else ""),
                       {"kind": "hermite", "alpha": list(alpha)})


def gaussian_bump(center, width: float, amplitude: float = 1.0) -> ScalarField:
    """``amplitude * exp(-|y - c|^2 / width^2)``."""
    center = np.asarray(center, dtype=float)
    amplitude = float(amplitude)
    parity = "even" if not np.any(center) else "none"
    return ScalarField(center.size, lambda x: np.full(x.shape[0], amplitude),
                       1.0 / width**2, center, None, 0, parity,
                       f"bump({center.tolist()},{width})",
                       {"kind": "bump", "width": width, "amplitude": amplitude})


def ball_indicator(center, radius: float, value: float = 1.0) -> ScalarField:
    center = np.asarray(center, dtype=float)
    value = float(value)
    parity = "even" if not np.any(center) else "none"
    return ScalarField(center.size, lambda x: np.full(x.shape[0], value), 0.0, None,
                       Ball(center, float(radius)), 0, parity,
                       f"ball({center.tolist()},{radius})",
                       {"kind": "ball", "value": value})


def expression_field(source: str, d: int, kappa: float = 0.0, center=None,
                     support: Ball | None = None) -> ScalarField:
    from gaussvarlp.expr import compile_expression

    compiled = compile_expression(source, d, field="field.source")
    return ScalarField(d, compiled, kappa, center, support, None, "none", source,
                       {"kind": "expression", "source": source})


def callable_field(fn, d: int, label: str = "callable", parity_hint: str = "none",
                   support: Ball | None = None) -> ScalarField:
    return ScalarField(d, fn, 0.0, None, support, None, parity_hint, label,
                       {"kind": "callable"})
