"""Modulars and Luxemburg norms of variable Lebesgue spaces, Hölder pairing,
finite-family ratios for the class of exponents with the ball property, and
a discrete Hardy-Littlewood maximal operator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.signal import fftconvolve
from scipy.special import logsumexp

from gaussvarlp.errors import NotInSpaceError, PreconditionError
from gaussvarlp.exponents import ExponentFunction, dual_exponent
from gaussvarlp.quadrature import (QuadratureScheme, gauss_hermite_tensor,
                                   truncated_uniform)

__all__ = [
    "ModularResult",
    "NormResult",
    "modular",
    "luxemburg_norm",
    "HolderResult",
    "holder_pairing_check",
    "g_class_ratio",
    "hl_maximal",
    "dyadic_radii",
]


@dataclass(frozen=True)
class ModularResult:
    value: float
    error_estimate: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class NormResult:
    value: float
    error_estimate: float | None
    iterations: int
    modular_at_value: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _values_on(f, scheme: QuadratureScheme) -> np.ndarray:
    if callable(f):
        return np.asarray(f(scheme.nodes), dtype=float)
    vals = np.asarray(f, dtype=float)
    if vals.shape != (scheme.size,):
        raise PreconditionError("field values must match the scheme nodes")
    return vals


def _companion(scheme: QuadratureScheme) -> QuadratureScheme | None:
    """Half-resolution rule of the same kind, for error estimates."""
    if scheme.kind == "gauss_hermite_tensor" and scheme.order >= 4:
        return gauss_hermite_tensor(scheme.d, scheme.order // 2)
    if scheme.kind == "truncated_uniform" and scheme.order >= 4:
        return truncated_uniform(scheme.d, scheme.truncation_radius, scheme.order // 2,
                                 scheme.measure)
    return None


def _log_terms(vals, pvals, lw, log_lambda=0.0):
    """``log w + p (log|f| - log lambda)`` with zeros mapped to ``-inf``."""
    a = np.abs(vals)
    out = np.full(a.shape, -np.inf)
    nz = a > 0
    out[nz] = lw[nz] + pvals[nz] * (np.log(a[nz]) - log_lambda)
    return out


def _check_exponent(p: ExponentFunction):
    if not np.isfinite(p.p_plus):
        raise PreconditionError("exponents with p_+ = inf are not supported")


def modular(f, p: ExponentFunction, scheme: QuadratureScheme,
            estimate_error: bool = True) -> ModularResult:
    """``int |f|^{p(x)} dmu`` on ``scheme``, evaluated as one exponential per node.

    ``f`` is a callable on ``(n, d)`` arrays or its values on the nodes. For
    callables the half-resolution rule of the same kind gives the error
    estimate.
    """
    _check_exponent(p)
    vals = _values_on(f, scheme)
    if not np.all(np.isfinite(vals)):
        raise NotInSpaceError("field is not finite on the quadrature nodes")
    with np.errstate(over="ignore"):
        value = float(np.exp(logsumexp(_log_terms(vals, p(scheme.nodes), scheme.log_weights))))
    err = None
    comp = _companion(scheme) if (estimate_error and callable(f)) else None
    if comp is not None:
        cv = np.asarray(f(comp.nodes), dtype=float)
        with np.errstate(over="ignore"):
            coarse = float(np.exp(logsumexp(_log_terms(cv, p(comp.nodes), comp.log_weights))))
        err = abs(value - coarse)
    return ModularResult(value, err)


def luxemburg_norm(p: ExponentFunction, f, scheme: QuadratureScheme,
                   estimate_error: bool = False) -> NormResult:
    """``inf {lambda > 0 : modular(f / lambda) <= 1}``.

    The map ``s = log lambda -> log modular(f e^{-s})`` is strictly
    decreasing; its root is bracketed by doubling and halving ``lambda``
    from 1 and then located by Brent's bracketing method (at most 200
    iterations).

    Raises
    ------
    NotInSpaceError
        If ``f`` is not finite on the nodes or no bracket is found.
    """
    _check_exponent(p)
    vals = _values_on(f, scheme)
    if not np.all(np.isfinite(vals)):
        raise NotInSpaceError("field is not finite on the quadrature nodes")
    if not np.any(vals != 0):
        return NormResult(0.0, 0.0, 0, 0.0)
    pv = p(scheme.nodes)
    lw = scheme.log_weights

    def logmod(s):
        return float(logsumexp(_log_terms(vals, pv, lw, s)))

    lo, hi = 0.0, 0.0
    step = math.log(2.0)
    for _ in range(2200):
        if logmod(hi) > 0:
            hi += step
        else:
            break
    else:
        raise NotInSpaceError("modular stays above 1 for every lambda on the scheme")
    lo = hi
    for _ in range(2200):
        if logmod(lo) <= 0:
            lo -= step
        else:
            break
    else:
        raise NotInSpaceError("modular stays below 1 for every lambda on the scheme")
    if logmod(hi) == 0.0:
        s_star, iters = hi, 0
    else:
        s_star, info = optimize.brentq(logmod, lo, hi, xtol=1e-15, rtol=1e-15,
                                       maxiter=200, full_output=True)
        iters = info.iterations
    value = math.exp(s_star)
    err = None
    if estimate_error and callable(f):
        comp = _companion(scheme)
        if comp is not None:
            err = abs(value - luxemburg_norm(p, f, comp).value)
    return NormResult(value, err, iters, math.exp(logmod(s_star)))


@dataclass(frozen=True)
class HolderResult:
    lhs: float
    rhs: float
    ratio: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def holder_pairing_check(f, g, p: ExponentFunction, scheme: QuadratureScheme) -> HolderResult:
    """``int |f g| dmu`` against ``2 ||f||_{p(.)} ||g||_{p'(.)}``."""
    fv = _values_on(f, scheme)
    gv = _values_on(g, scheme)
    lhs = scheme.integrate(np.abs(fv * gv))
    rhs = 2.0 * luxemburg_norm(p, fv, scheme).value \
        * luxemburg_norm(dual_exponent(p), gv, scheme).value
    if rhs == 0:
        return HolderResult(lhs, 0.0, 0.0 if lhs == 0 else math.inf)
    return HolderResult(lhs, rhs, lhs / rhs)


def g_class_ratio(p: ExponentFunction, family, f, g,
                  scheme: QuadratureScheme | None = None, grid_n: int = 400) -> float:
    """``sum_B ||f 1_B||_{p} ||g 1_B||_{p'} / (||f||_{p} ||g||_{p'})``.

    Norms use Lebesgue measure on a truncated box; by default the box has
    half side ``coverage_radius + 2`` of the family.

    Raises
    ------
    PreconditionError
        If either norm in the denominator vanishes.
    """
    if scheme is None:
        scheme = truncated_uniform(family.d, family.coverage_radius + 2.0, grid_n,
                                   "lebesgue")
    if scheme.measure != "lebesgue":
        raise PreconditionError("the ratio is defined with Lebesgue-measure norms")
    pd = dual_exponent(p)
    fv = _values_on(f, scheme)
    gv = _values_on(g, scheme)
    denom = luxemburg_norm(p, fv, scheme).value * luxemburg_norm(pd, gv, scheme).value
    if denom == 0:
        raise PreconditionError("zero norm in the denominator")
    total = 0.0
    pts = scheme.nodes
    for c, rad in zip(family.centers, family.radii):
        inside = np.sum((pts - c) ** 2, axis=1) < rad**2
        if not inside.any():
            continue
        total += luxemburg_norm(p, np.where(inside, fv, 0.0), scheme).value \
            * luxemburg_norm(pd, np.where(inside, gv, 0.0), scheme).value
    return total / denom


def dyadic_radii(shape, max_level: int | None = None) -> list[int]:
    """Radii in grid units: 0 and ``2^k`` up to the grid extent."""
    extent = max(shape)
    top = int(math.floor(math.log2(extent))) if max_level is None else max_level
    return [0] + [2**k for k in range(top + 1)]


def _disc_mask(radius: int, d: int) -> np.ndarray:
    ax = np.arange(-radius, radius + 1)
    grids = np.meshgrid(*([ax] * d), indexing="ij")
    return (sum(g**2 for g in grids) <= radius**2).astype(float)


def hl_maximal(values, max_level: int | None = None) -> np.ndarray:
    """Dyadic discrete maximal function of ``|values|`` on a uniform grid.

    At each grid point returns the largest average of ``|f|`` over the
    discrete balls of radius ``0`` and ``2^k`` grid steps centred there. Balls
    are clipped to the grid and averages taken over grid points inside. The
    dyadic supremum is within a factor ``2^d`` of the full centred supremum.
    """
    a = np.abs(np.asarray(values, dtype=float))
    d = a.ndim
    ones = np.ones_like(a)
    out = a.copy()
    for rad in dyadic_radii(a.shape, max_level)[1:]:
        mask = _disc_mask(rad, d)
        num = fftconvolve(a, mask, mode="same")
        den = fftconvolve(ones, mask, mode="same")
        # FFT round-off: clip small negatives and snap near-integer counts
        avg = np.maximum(num, 0.0) / np.rint(den)
        np.maximum(out, avg, out=out)
    return out
