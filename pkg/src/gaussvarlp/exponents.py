"""Exponent functions and their regularity classes.

An exponent is an oracle ``p: R^d -> [1, inf)`` with finite essential
supremum. Membership in the local log-Hölder class ``LH0``, the log-Hölder
at infinity class ``LHinf`` and the Gaussian class ``P_gamma_inf``
(``|p(x) - p_inf| <= C / |x|^2``) is estimated by sampled suprema.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from gaussvarlp.errors import PreconditionError

__all__ = [
    "ExponentFunction",
    "ClassReport",
    "EquivalenceResult",
    "constant_exponent",
    "radial_rational_exponent",
    "expression_exponent",
    "dual_exponent",
    "conjugate",
    "check_lh0",
    "check_lh_infinity",
    "check_p_gamma_inf",
    "lemma_equiv_constants",
    "default_samples",
    "radial_samples",
    "grid_pairs",
    "PASS_RTOL",
]

PASS_RTOL = 1e-6

# max |grad 1/(1+|x|^2)|, attained at |x| = 1/sqrt(3)
_RATIONAL_LIPSCHITZ = 9.0 / (8.0 * np.sqrt(3.0))


def conjugate(p):
    """Hölder conjugate ``p / (p - 1)``, elementwise."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        return p / (p - 1.0)


@dataclass(frozen=True)
class ExponentFunction:
    """An exponent ``p(.)`` together with its claimed class constants.

    Attributes
    ----------
    eval : callable
        Maps points of shape ``(n, d)`` to exponents of shape ``(n,)``.
    family_tag : str
        ``"constant"``, ``"radial_rational"`` or ``"user_expression"``.
    p_inf : float
        Claimed limit exponent.
    c_gamma : float
        Claimed constant of ``|p(x) - p_inf| <= c_gamma / |x|^2``.
    lh0_const : float
        Claimed local log-Hölder constant.
    p_minus, p_plus : float
        Essential bounds over ``R^d``.
    params : dict
        Family parameters, echoed in reports.
    """

    eval: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    family_tag: str
    p_inf: float
    c_gamma: float
    lh0_const: float
    p_minus: float
    p_plus: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.p_plus):
            raise PreconditionError("exponents with p_plus = inf are not supported")
        if self.p_minus < 1.0:
            raise PreconditionError(f"p_minus = {self.p_minus} < 1 is not an exponent")
        if not (self.p_minus <= self.p_plus):
            raise PreconditionError("p_minus must not exceed p_plus")
        if not (self.p_minus - 1e-12 <= self.p_inf <= self.p_plus + 1e-12):
            raise PreconditionError("p_inf must lie in [p_minus, p_plus]")

    def __call__(self, points) -> np.ndarray:
        return self.eval(np.atleast_2d(np.asarray(points, dtype=float)))

    def describe(self) -> dict:
        return {"family": self.family_tag, "p_inf": self.p_inf,
                "c_gamma": self.c_gamma, "lh0_const": self.lh0_const,
                "p_minus": self.p_minus, "p_plus": self.p_plus, **self.params}


def constant_exponent(p: float) -> ExponentFunction:
    p = float(p)

    def ev(x):
        return np.full(x.shape[0], p)

    return ExponentFunction(ev, "constant", p, 0.0, 0.0, p, p, {"p": p})


def radial_rational_exponent(p_inf: float, amplitude: float = 1.0) -> ExponentFunction:
    """``p(x) = p_inf + amplitude / (1 + |x|^2)``.

    The claimed constants are exact: ``c_gamma = |amplitude|`` is the supremum
    of ``|x|^2 |amplitude| / (1 + |x|^2)``, and the log-Hölder constant is
    ``|amplitude| * log(e + L)`` with ``L`` the Lipschitz constant of
    ``1 / (1 + |x|^2)``, because ``min(L s, 1) log(e + 1/s)`` peaks at ``s = 1/L``.
    """
    p_inf, amplitude = float(p_inf), float(amplitude)

    def ev(x):
        return p_inf + amplitude / (1.0 + np.sum(x * x, axis=1))

    lo, hi = sorted((p_inf, p_inf + amplitude))
    return ExponentFunction(ev, "radial_rational", p_inf, abs(amplitude),
                            abs(amplitude) * np.log(np.e + _RATIONAL_LIPSCHITZ),
                            lo, hi, {"amplitude": amplitude})


def expression_exponent(source: str, d: int, p_inf: float | None = None,
                        c_gamma: float | None = None,
                        lh0_const: float | None = None,
                        samples: np.ndarray | None = None) -> ExponentFunction:
    """Exponent given by an arithmetic expression in ``x1..xd``.

    Unspecified metadata is estimated on ``samples`` (default:
    :func:`default_samples`): ``p_minus``/``p_plus`` by sampled extrema,
    ``p_inf`` by the median on the outermost radial shell and ``c_gamma``,
    ``lh0_const`` by the corresponding sampled suprema.
    """
    from gaussvarlp.expr import compile_expression

    compiled = compile_expression(source, d, field="exponent.source")
    pts = default_samples(d) if samples is None else np.asarray(samples, float)
    vals = compiled(pts)
    if not np.all(np.isfinite(vals)):
        raise PreconditionError("exponent expression is not finite on the sample set")
    if p_inf is None:
        p_inf = _outer_shell_median(pts, vals, np.zeros(d))[0]
    p_minus = min(float(vals.min()), float(p_inf))
    p_plus = max(float(vals.max()), float(p_inf))
    if c_gamma is None:
        r2 = np.sum(pts**2, axis=1)
        nz = r2 > 0
        c_gamma = float(np.max(r2[nz] * np.abs(vals[nz] - p_inf)))
    if lh0_const is None:
        x, y = grid_pairs(d)
        lh0_const = check_lh0(compiled, (x, y)).estimated_constant
    return ExponentFunction(compiled, "user_expression", float(p_inf),
                            float(c_gamma), float(lh0_const), p_minus, p_plus,
                            {"source": source})


def dual_exponent(p: ExponentFunction) -> ExponentFunction:
    """Pointwise Hölder conjugate ``p'(x) = p(x) / (p(x) - 1)``.

    Raises
    ------
    PreconditionError
        If ``p_minus == 1``; the conjugate is then unbounded.
    """
    if p.p_minus <= 1.0:
        raise PreconditionError("dual exponent requires p_minus > 1")
    base = p.eval

    def ev(x):
        return conjugate(base(x))

    # |p' - q'| = |p - q| / ((p - 1)(q - 1))
    scale_inf = 1.0 / ((p.p_minus - 1.0) * (p.p_inf - 1.0)) if p.p_inf > 1 else np.inf
    return ExponentFunction(
        ev, p.family_tag, float(conjugate(p.p_inf)), p.c_gamma * scale_inf,
        p.lh0_const / (p.p_minus - 1.0) ** 2, float(conjugate(p.p_plus)),
        float(conjugate(p.p_minus)), {**p.params, "dual": True})


@dataclass(frozen=True)
class ClassReport:
    """Outcome of a sampled class-membership check.

    ``passed`` holds iff ``estimated_constant <= claimed * (1 + PASS_RTOL)``;
    with no claimed constant it records only that the estimate is finite.
    """

    class_name: str
    estimated_constant: float
    witness_pair: tuple
    passed: bool
    claimed_constant: float | None = None
    alpha_inf: float | None = None
    flags: tuple = ()

    def to_dict(self) -> dict:
        return {
            "class_name": self.class_name,
            "estimated_constant": self.estimated_constant,
            "witness_pair": [np.asarray(w).tolist() for w in self.witness_pair],
            "passed": self.passed,
            "claimed_constant": self.claimed_constant,
            "alpha_inf": self.alpha_inf,
            "flags": list(self.flags),
        }


def _passes(estimate, claimed):
    if not np.isfinite(estimate):
        return False
    if claimed is None:
        return True
    return bool(estimate <= claimed * (1.0 + PASS_RTOL) + 1e-300)


def _as_target(target):
    if isinstance(target, ExponentFunction):
        return target.eval
    return lambda x: np.asarray(target(np.atleast_2d(x)), dtype=float)


def check_lh0(target, sample_pairs, claimed: float | None = None) -> ClassReport:
    """Estimate ``sup |a(x) - a(y)| log(e + 1/|x - y|)`` over ``sample_pairs``.

    ``target`` is any vectorised scalar function, so both ``p`` and ``1/p``
    can be checked. ``sample_pairs`` is ``(X, Y)`` with matching rows.
    """
    x, y = (np.atleast_2d(np.asarray(a, dtype=float)) for a in sample_pairs)
    if x.shape[0] == 0 or x.shape != y.shape:
        raise PreconditionError("sample_pairs must be a nonempty pair of (n, d) arrays")
    dist = np.linalg.norm(x - y, axis=1)
    if np.any(dist == 0):
        raise PreconditionError("sample pairs must satisfy x != y")
    ev = _as_target(target)
    vals = np.abs(ev(x) - ev(y)) * np.log(np.e + 1.0 / dist)
    if claimed is None and isinstance(target, ExponentFunction):
        claimed = target.lh0_const
    k = int(np.nanargmax(vals)) if np.any(np.isfinite(vals)) else 0
    est = float(vals[k])
    return ClassReport("LH0", est, (x[k], y[k]), _passes(est, claimed), claimed)


def _outer_shell_median(pts, vals, x0, shell_fraction=0.05):
    rad = np.linalg.norm(pts - x0, axis=1)
    cut = np.quantile(rad, 1.0 - shell_fraction)
    shell = vals[rad >= cut]
    med = float(np.median(shell))
    spread = float(shell.max() - shell.min())
    return med, spread


def check_lh_infinity(target, base_point=None, samples=None,
                      alpha_inf: float | None = None,
                      claimed: float | None = None) -> ClassReport:
    """Estimate ``sup |a(x) - a_inf| log(e + |x - x0|)``.

    When ``alpha_inf`` is not supplied it is fitted as the median of ``a``
    on the outermost 5% radial shell of the samples. A shell spread larger
    than ``0.05 (1 + |median|)`` means no limit was detected; the report then
    fails with flag ``"no limit detected"``.
    """
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    if pts.shape[0] == 0:
        raise PreconditionError("samples must be nonempty")
    x0 = np.zeros(pts.shape[1]) if base_point is None else np.asarray(base_point, float)
    ev = _as_target(target)
    vals = ev(pts)
    flags = []
    if alpha_inf is None:
        if isinstance(target, ExponentFunction):
            alpha_inf = target.p_inf
        else:
            alpha_inf, spread = _outer_shell_median(pts, vals, x0)
            if spread > 0.05 * (1.0 + abs(alpha_inf)):
                flags.append("no limit detected")
    prod = np.abs(vals - alpha_inf) * np.log(np.e + np.linalg.norm(pts - x0, axis=1))
    k = int(np.argmax(prod))
    est = float(prod[k])
    passed = _passes(est, claimed) and not flags
    return ClassReport("LHinf", est, (pts[k],), passed, claimed, float(alpha_inf),
                       tuple(flags))


def check_p_gamma_inf(p: ExponentFunction, samples,
                      p_inf: float | None = None,
                      claimed: float | None = None) -> ClassReport:
    """Estimate ``sup_{x != 0} |x|^2 |p(x) - p_inf|`` on ``samples``."""
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    r2 = np.sum(pts * pts, axis=1)
    if np.any(r2 == 0):
        raise PreconditionError("samples must exclude the origin")
    p_inf = p.p_inf if p_inf is None else p_inf
    claimed = p.c_gamma if claimed is None else claimed
    prod = r2 * np.abs(p(pts) - p_inf)
    k = int(np.argmax(prod))
    est = float(prod[k])
    return ClassReport("P_gamma_inf", est, (pts[k],), _passes(est, claimed), claimed,
                       float(p_inf))


@dataclass(frozen=True)
class EquivalenceResult:
    """Constants of the two-sided exponential equivalences and their check."""

    C1: float
    C2: float
    verified: bool
    violating_x: np.ndarray | None = None
    n_samples: int = 0

    def to_dict(self) -> dict:
        return {"C1": self.C1, "C2": self.C2, "verified": self.verified,
                "violating_x": None if self.violating_x is None
                else np.asarray(self.violating_x).tolist(),
                "n_samples": self.n_samples}


def lemma_equiv_constants(p: ExponentFunction, samples) -> EquivalenceResult:
    """Constants ``C1 = exp(c_gamma / p_inf)`` and ``C2 = exp(c_gamma p_-' / p_inf)``.

    Checks, for every sample ``x``,
    ``C1^-1 <= exp(-|x|^2 (p(x)/p_inf - 1)) <= C1`` and the same with
    ``p'``, ``p'_inf`` and ``C2``. Comparisons are made on the logarithms.

    Raises
    ------
    PreconditionError
        If ``p_minus == 1`` or ``p`` fails :func:`check_p_gamma_inf` on the
        nonzero samples.
    """
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    if p.p_minus <= 1.0:
        raise PreconditionError("equivalence constants require p_minus > 1")
    nz = np.sum(pts * pts, axis=1) > 0
    report = check_p_gamma_inf(p, pts[nz])
    if not report.passed:
        raise PreconditionError(
            f"p is not in P_gamma_inf with c_gamma={p.c_gamma}: sampled constant "
            f"{report.estimated_constant:.6g} at x={report.witness_pair[0].tolist()}")
    log_c1 = p.c_gamma / p.p_inf
    log_c2 = p.c_gamma * float(conjugate(p.p_minus)) / p.p_inf
    r2 = np.sum(pts * pts, axis=1)
    pv = p(pts)
    e1 = -r2 * (pv / p.p_inf - 1.0)
    e2 = -r2 * (conjugate(pv) / float(conjugate(p.p_inf)) - 1.0)
    slack = 1e-12 * (1.0 + r2)
    bad = (np.abs(e1) > log_c1 + slack) | (np.abs(e2) > log_c2 + slack)
    violating = pts[np.argmax(bad)] if np.any(bad) else None
    return EquivalenceResult(float(np.exp(log_c1)), float(np.exp(log_c2)),
                             not np.any(bad), violating, pts.shape[0])


def radial_samples(d: int, n: int = 1000, r_max: float = 50.0,
                   seed: int = 0) -> np.ndarray:
    """``n`` points with radii evenly spaced in ``(0, r_max]``, seeded directions."""
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = r_max * np.arange(1, n + 1) / n
    return dirs * radii[:, None]


def default_samples(d: int, grid_half_width: float = 20.0, grid_n: int | None = None,
                    n_radial: int = 1000, r_max: float = 50.0,
                    seed: int = 0) -> np.ndarray:
    """Tensor grid on ``[-20, 20]^d`` plus radial samples out to ``|x| = 50``."""
    if grid_n is None:
        grid_n = {1: 401, 2: 81}.get(d, 21)
    g = np.linspace(-grid_half_width, grid_half_width, grid_n)
    mesh = np.stack([m.ravel() for m in np.meshgrid(*([g] * d), indexing="ij")], -1)
    return np.concatenate([mesh, radial_samples(d, n_radial, r_max, seed)])


def grid_pairs(d: int, half_width: float = 10.0, n: int = 101,
               offsets=(1, 2, 4, 8, 16, 32)) -> tuple[np.ndarray, np.ndarray]:
    """Pairs of grid points on ``[-hw, hw]^d`` separated by ``k`` steps along an axis."""
    g = np.linspace(-half_width, half_width, n)
    mesh = np.stack([m.ravel() for m in np.meshgrid(*([g] * d), indexing="ij")], -1)
    idx = np.stack(np.unravel_index(np.arange(mesh.shape[0]), (n,) * d), -1)
    xs, ys = [], []
    for k in offsets:
        for axis in range(d):
            ok = idx[:, axis] + k < n
            shift = np.zeros(d, dtype=int)
            shift[axis] = k
            j = np.ravel_multi_index(tuple((idx[ok] + shift).T), (n,) * d)
            xs.append(mesh[ok])
            ys.append(mesh[j])
    return np.concatenate(xs), np.concatenate(ys)


def with_constants(p: ExponentFunction, **changes) -> ExponentFunction:
    """Copy of ``p`` with replaced metadata (for testing claimed constants)."""
    return replace(p, **changes)
