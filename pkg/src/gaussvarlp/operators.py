"""Application of ``T_{F,m}`` and ``Tbar_{F,m}``, operator-norm and weak-type estimates.

Evaluation order
----------------
With ``y = sqrt(1-t) x + sqrt(t) z`` the operators become

    T f(x) = 1/2 int_0^1 psi_m(t) t^{-1} I(x, t) dt,
    I(x, t) = int F(arg) f(sqrt(1-t) x + sqrt(t) z) exp(-|z|^2) dz,

with ``arg = z`` (general) or ``arg = sqrt(t) x - sqrt(1-t) z``
(alternative). For every fixed ``t`` the inner integral is absolutely
convergent and, because ``int F dgamma = 0``, it is ``O(sqrt t)`` as
``t -> 0`` for ``C^1`` fields, so the outer integral converges without a
diagonal exclusion. This iterated integral is how the operators are defined
(r-integral inside, y-integral outside, then Fubini for ``t > 0``).

Fields of the form ``A(y) exp(-kappa |y - c|^2) 1_S(y)`` are integrated by
completing the square: the Gaussian factor merges with ``exp(-|z|^2)`` and the
remaining integrand is ``F * A`` against a shifted, rescaled Gauss weight.
Hard cutoffs (the support ``S`` and the admissible ball of the local/global
split) become discs in the inner variable and are integrated exactly as
regions by :mod:`gaussvarlp.regionquad` whenever they cut the Gaussian window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from gaussvarlp.errors import PreconditionError
from gaussvarlp.fields import (FieldSum, ScalarField, ball_indicator, gaussian_bump,
                               hermite_field)
from gaussvarlp.geometry import admissibility_radius
from gaussvarlp.kernels import (ALTERNATIVE, GENERAL, ProfileFunction, log_psi,
                                require_certified)
from gaussvarlp.quadrature import (QuadratureScheme, composite_gauss_legendre,
                                   gauss_hermite_tensor)
from gaussvarlp.regionquad import S_MAX, disc_region_integral

__all__ = [
    "OperatorSpec",
    "TGrid",
    "t_grid",
    "OperatorValues",
    "evaluate",
    "apply",
    "apply_local",
    "apply_global",
    "DistributionReport",
    "distribution_function",
    "gaussian_l1_norm",
    "NormEstimate",
    "operator_norm_estimate",
    "standard_family",
]

FULL, LOCAL, GLOBAL = "full", "local", "global"
_POINT_BUDGET = 1_500_000


@dataclass(frozen=True)
class TGrid:
    """Nodes of the outer t-integral with ``dt`` weights."""

    t: np.ndarray
    one_minus_t: np.ndarray
    log_one_minus_t: np.ndarray
    weights: np.ndarray


_W_EDGES = (math.log(2.0), 1.5, 3.0, 5.0, 8.0, 13.0, 20.0, 40.0)


def t_grid(tau_panels: int = 28, order: int = 8, t_min: float = 1e-18,
           w_edges=_W_EDGES, w_order: int = 6) -> TGrid:
    """Composite Gauss-Legendre in ``log t`` on ``[t_min, 1/2]`` and in
    ``-log(1-t)`` on ``[1/2, 1 - e^{-40}]``."""
    tn, tw = composite_gauss_legendre(
        np.linspace(math.log(t_min), math.log(0.5), tau_panels + 1), order)
    wn, ww = composite_gauss_legendre(np.asarray(w_edges), w_order)
    t_a = np.exp(tn)
    t_b = -np.expm1(-wn)
    return TGrid(np.concatenate([t_a, t_b]),
                 np.concatenate([1.0 - t_a, np.exp(-wn)]),
                 np.concatenate([np.log1p(-t_a), -wn]),
                 np.concatenate([tw * t_a, ww * np.exp(-wn)]))


@dataclass(frozen=True)
class OperatorSpec:
    """Operator ``T_{F,m}`` (general) or ``Tbar_{F,m}`` (alternative).

    Attributes
    ----------
    variant : str
    F : ProfileFunction
        Certified on construction; non-orthogonal profiles are rejected.
    m : int
    d : int
    scale_const : float or None
        ``C_d`` of the admissible balls; defaults to ``d``.
    outer_tol : float
        Target accuracy of ``T f(x)``; the t-refinement check flags larger
        changes.
    inner_order : int
        Gauss-Hermite order per axis for non-polynomial integrands.
    tau_panels, t_order, t_min, w_order
        Outer t-rule, see :func:`t_grid`.
    n_radial, n_angular
        Polar rule for discs cutting the inner Gaussian window.
    """

    variant: str
    F: ProfileFunction
    m: int
    d: int
    scale_const: float | None = None
    outer_tol: float = 1e-6
    inner_order: int = 20
    tau_panels: int = 28
    t_order: int = 8
    t_min: float = 1e-18
    w_order: int = 6
    n_radial: int = 10
    n_angular: int = 16

    def __post_init__(self):
        if self.variant not in (GENERAL, ALTERNATIVE):
            raise PreconditionError(f"unknown variant {self.variant!r}")
        if self.variant == ALTERNATIVE and self.d < 2:
            raise PreconditionError("the alternative operator requires d > 1")
        if int(self.m) != self.m or self.m < 1:
            raise PreconditionError("m must be a positive integer")
        if self.F.d != self.d:
            raise PreconditionError("profile dimension does not match d")
        object.__setattr__(self, "F", require_certified(self.F))
        if self.scale_const is None:
            object.__setattr__(self, "scale_const", float(self.d))

    def grid(self, coarse: bool = False) -> TGrid:
        panels = max(self.tau_panels // 2, 4) if coarse else self.tau_panels
        return t_grid(panels, self.t_order, self.t_min, w_order=self.w_order)

    def describe(self) -> dict:
        return {"variant": self.variant, "F": self.F.describe(), "m": self.m,
                "d": self.d, "scale_const": self.scale_const,
                "outer_tol": self.outer_tol, "inner_order": self.inner_order,
                "tau_panels": self.tau_panels, "t_order": self.t_order,
                "t_min": self.t_min, "w_order": self.w_order, "n_radial": self.n_radial,
                "n_angular": self.n_angular}


@dataclass(frozen=True)
class OperatorValues:
    values: np.ndarray
    error_estimate: np.ndarray | None = None
    flags: tuple = ()

    def to_dict(self) -> dict:
        return {"values": self.values.tolist(),
                "error_estimate": None if self.error_estimate is None
                else self.error_estimate.tolist(),
                "flags": list(self.flags)}


def _gh_order(spec: OperatorSpec, term: ScalarField) -> int:
    """Exact order for polynomial integrands, else ``spec.inner_order``."""
    if spec.F.degree is not None and term.degree is not None:
        return (spec.F.degree + term.degree) // 2 + 1
    return spec.inner_order


def _terms(f) -> list[ScalarField]:
    if isinstance(f, FieldSum):
        return f.terms
    if isinstance(f, ScalarField):
        return [f]
    raise PreconditionError("expected a ScalarField or FieldSum")


def _inner(spec: OperatorSpec, term: ScalarField, X: np.ndarray, tg: TGrid,
           part: str, flags: set) -> np.ndarray:
    """``I(x, t)`` of the module docstring for one field term, shape ``(nx, nt)``."""
    nx, d = X.shape
    nt = tg.t.size
    r = np.sqrt(tg.one_minus_t)
    st = np.sqrt(tg.t)
    kappa = term.kappa
    rx = r[None, :, None] * X[:, None, :]
    if kappa > 0:
        a = term.center - rx
        P = 1.0 + kappa * tg.t
        mu = kappa * st[None, :, None] * a / P[None, :, None]
        logpref = -kappa * np.sum(a * a, axis=-1) / P - 0.5 * d * np.log(P)
    else:
        mu = np.zeros((nx, nt, d))
        P = np.ones(nt)
        logpref = np.zeros((nx, nt))
    sqP = np.sqrt(P)
    scale = (sqP / st)[None, :]

    constraints = []
    if term.support is not None:
        b = np.broadcast_to(term.support.center, (nx, d))
        R = np.full(nx, term.support.radius)
        constraints.append((b, R, True))
    if part != FULL:
        R = spec.scale_const * np.atleast_1d(admissibility_radius(X))
        constraints.append((X, R, part == LOCAL))

    betas, rhos, inside = [], [], []
    zero = np.zeros((nx, nt), dtype=bool)
    straddle = []
    for b, R, ins in constraints:
        beta = (b[:, None, :] - rx - st[None, :, None] * mu) * scale[..., None]
        rho = R[:, None] * scale
        dist = np.linalg.norm(beta, axis=-1)
        full_in = dist + S_MAX <= rho
        full_out = dist - rho >= S_MAX
        zero |= full_out if ins else full_in
        straddle.append(~(full_in | full_out))
        betas.append(beta)
        rhos.append(rho)
        inside.append(ins)

    F, A = spec.F, term.amplitude
    alt = spec.variant == ALTERNATIVE

    def integrand(ix, it, w):
        """``F(arg) A(y)`` at inner points ``w`` of shape ``(B, M, d)``."""
        z = mu[ix, it][:, None, :] + w / sqP[it][:, None, None]
        y = rx[ix, it][:, None, :] + st[it][:, None, None] * z
        if alt:
            arg = st[it][:, None, None] * X[ix][:, None, :] - r[it][:, None, None] * z
        else:
            arg = z
        B, M = w.shape[0], w.shape[1]
        val = F.eval(arg.reshape(-1, d)) * A(y.reshape(-1, d))
        return val.reshape(B, M)

    out = np.zeros((nx, nt))
    pattern = np.zeros((nx, nt), dtype=np.int64)
    for j, s in enumerate(straddle):
        pattern |= s.astype(np.int64) << j
    pattern[zero] = -1

    gh = gauss_hermite_tensor(d, _gh_order(spec, term), prune=1e-18)
    gh_nodes = gh.nodes
    gh_w = gh.weights * math.pi ** (0.5 * d)
    for pat in np.unique(pattern):
        if pat < 0:
            continue
        ix, it = np.nonzero(pattern == pat)
        active = [j for j in range(len(constraints)) if pat >> j & 1]
        if not active:
            budget = max(1, _POINT_BUDGET // gh_nodes.shape[0])
            for s in range(0, ix.size, budget):
                sl = slice(s, s + budget)
                w = np.broadcast_to(gh_nodes, (ix[sl].size,) + gh_nodes.shape)
                out[ix[sl], it[sl]] = integrand(ix[sl], it[sl], w) @ gh_w
            continue
        if d != 2:
            flags.add("hard cutoff integrated by a masked Gauss-Hermite rule (d != 2)")
            budget = max(1, _POINT_BUDGET // gh_nodes.shape[0])
            for s in range(0, ix.size, budget):
                sl = slice(s, s + budget)
                w = np.broadcast_to(gh_nodes, (ix[sl].size,) + gh_nodes.shape)
                mask = np.ones(w.shape[:2], dtype=bool)
                for j in active:
                    inn = np.sum((w - betas[j][ix[sl], it[sl]][:, None, :]) ** 2,
                                 axis=-1) < rhos[j][ix[sl], it[sl]][:, None] ** 2
                    mask &= inn if inside[j] else ~inn
                out[ix[sl], it[sl]] = (integrand(ix[sl], it[sl], w) * mask) @ gh_w
            continue
        k = len(active)
        n_pts = (6 + 2 * k + (2 if k == 2 else 0)) * spec.n_radial \
            * spec.n_angular * (3 if k == 2 else 1)
        budget = max(1, _POINT_BUDGET // n_pts)
        for s in range(0, ix.size, budget):
            sl = slice(s, s + budget)
            i_s, t_s = ix[sl], it[sl]
            bb = np.stack([betas[j][i_s, t_s] for j in active], axis=1)
            rr = np.stack([rhos[j][i_s, t_s] for j in active], axis=1)
            out[i_s, t_s] = disc_region_integral(
                lambda w: integrand(i_s, t_s, w), bb, rr, [inside[j] for j in active],
                spec.n_radial, spec.n_angular)
    return np.where(zero, 0.0, out * np.exp(logpref))


def _t_integral(spec: OperatorSpec, f, X: np.ndarray, tg: TGrid, part: str,
                flags: set) -> np.ndarray:
    lp = log_psi(tg.t, tg.one_minus_t, tg.log_one_minus_t, spec.m, spec.d, spec.variant)
    wt = 0.5 * tg.weights * np.exp(lp - np.log(tg.t))
    total = np.zeros(X.shape[0])
    for term in _terms(f):
        total += _inner(spec, term, X, tg, part, flags) @ wt
    return total


def evaluate(spec: OperatorSpec, f, X, part: str = FULL,
             estimate_error: bool = True, chunk: int = 512) -> OperatorValues:
    """``T f`` (or its local/global part) at the points ``X``.

    With ``estimate_error`` the outer t-rule is repeated with half the panels
    and the difference is reported; differences above ``spec.outer_tol`` set
    a flag.
    """
    if part not in (FULL, LOCAL, GLOBAL):
        raise PreconditionError(f"unknown part {part!r}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != spec.d:
        raise PreconditionError("evaluation points do not match the dimension")
    flags: set = set()
    fine, coarse = spec.grid(), spec.grid(coarse=True)
    vals = np.empty(X.shape[0])
    err = np.empty(X.shape[0]) if estimate_error else None
    for s in range(0, X.shape[0], chunk):
        xs = X[s:s + chunk]
        vals[s:s + chunk] = _t_integral(spec, f, xs, fine, part, flags)
        if estimate_error:
            err[s:s + chunk] = np.abs(vals[s:s + chunk]
                                      - _t_integral(spec, f, xs, coarse, part, flags))
    if estimate_error and np.any(err > spec.outer_tol * (1.0 + np.abs(vals))):
        flags.add("t-refinement change exceeds outer_tol")
    return OperatorValues(vals, err, tuple(sorted(flags)))


def _scalar_or_array(res: OperatorValues, x):
    return float(res.values[0]) if np.ndim(x) == 1 else res.values


def apply(spec: OperatorSpec, f, x):
    """``T f(x)``; ``x`` is a point (returns a float) or an ``(n, d)`` array."""
    return _scalar_or_array(evaluate(spec, f, x, FULL, estimate_error=False), x)


def apply_local(spec: OperatorSpec, f, x):
    """Part of ``T f(x)`` from ``|y - x| < C_d m(x)``."""
    return _scalar_or_array(evaluate(spec, f, x, LOCAL, estimate_error=False), x)


def apply_global(spec: OperatorSpec, f, x):
    """Part of ``T f(x)`` from ``|y - x| >= C_d m(x)``."""
    return _scalar_or_array(evaluate(spec, f, x, GLOBAL, estimate_error=False), x)


def gaussian_l1_norm(f, d: int | None = None, grid_n: int = 801,
                     radius: float = 8.0) -> float:
    """``int |f| dgamma_d``.

    Single Gaussian-factor terms with constant amplitude are integrated in
    closed form; anything else uses a midpoint grid on ``[-radius, radius]^d``.
    """
    terms = _terms(f)
    if len(terms) == 1 and terms[0].support is None and terms[0].kappa > 0 \
            and terms[0].degree == 0:
        t = terms[0]
        amp = abs(float(t.amplitude(t.center[None])[0]))
        k, c2 = t.kappa, float(np.sum(t.center**2))
        return amp * (1.0 + k) ** (-0.5 * t.d) * math.exp(-k * c2 / (1.0 + k))
    from gaussvarlp.quadrature import truncated_uniform
    d = terms[0].d if d is None else d
    n = grid_n if d <= 2 else max(grid_n // 8, 41)
    sch = truncated_uniform(d, radius, n)
    return sch.integrate(np.abs(f(sch.nodes)))


@dataclass(frozen=True)
class DistributionReport:
    """Superlevel measures ``gamma_d({|T f| > lambda})`` and weak ratios."""

    lambdas: np.ndarray
    measures: np.ndarray
    weak_ratios: np.ndarray
    l1_norm: float
    flags: tuple = ()

    @property
    def sup_weak_ratio(self) -> float:
        return float(np.max(self.weak_ratios)) if self.weak_ratios.size else 0.0

    def to_dict(self) -> dict:
        return {"lambdas": self.lambdas.tolist(), "measures": self.measures.tolist(),
                "weak_ratios": self.weak_ratios.tolist(), "l1_norm": self.l1_norm,
                "sup_weak_ratio": self.sup_weak_ratio, "flags": list(self.flags)}


def distribution_function(spec: OperatorSpec, f, lambdas,
                          eval_grid: QuadratureScheme, values=None) -> DistributionReport:
    """Distribution function of ``|T f|`` sampled on ``eval_grid``.

    ``eval_grid`` must carry Gaussian weights; ``values`` may pass a
    precomputed ``T f`` on its nodes.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any(lambdas <= 0):
        raise PreconditionError("lambdas must be positive")
    if eval_grid.measure != "gaussian":
        raise PreconditionError("eval_grid must integrate against gamma_d")
    flags = ()
    if values is None:
        res = evaluate(spec, f, eval_grid.nodes, estimate_error=False)
        values, flags = res.values, res.flags
    absval = np.abs(np.asarray(values))
    order = np.argsort(absval)
    sorted_vals = absval[order]
    # tail sums of weights give every superlevel measure in one pass
    tail = np.concatenate([np.cumsum(eval_grid.weights[order][::-1])[::-1], [0.0]])
    measures = np.minimum(tail[np.searchsorted(sorted_vals, lambdas, side="right")], 1.0)
    l1 = gaussian_l1_norm(f, spec.d)
    if l1 == 0:
        ratios = np.zeros_like(lambdas)
    else:
        ratios = lambdas * measures / l1
    return DistributionReport(lambdas, measures, ratios, l1, flags)


@dataclass(frozen=True)
class NormEstimate:
    max_ratio: float
    ratios: np.ndarray
    labels: tuple
    norms_f: np.ndarray
    norms_Tf: np.ndarray
    flags: tuple = ()

    def to_dict(self) -> dict:
        return {"max_ratio": self.max_ratio, "ratios": self.ratios.tolist(),
                "labels": list(self.labels), "norms_f": self.norms_f.tolist(),
                "norms_Tf": self.norms_Tf.tolist(), "flags": list(self.flags)}


def operator_norm_estimate(spec: OperatorSpec, p, test_family, scheme: QuadratureScheme,
                           check_exponent: bool = True, values=None) -> NormEstimate:
    """``max_f ||T f||_{p(.)} / ||f||_{p(.)}`` with ``T f`` materialised on ``scheme``.

    Parameters
    ----------
    values : list of ndarray, optional
        Precomputed ``T f`` on the scheme nodes, one per test function.

    Raises
    ------
    PreconditionError
        If ``p`` fails the class checks or a test function has zero norm.
    """
    from gaussvarlp.exponents import (check_lh0, check_p_gamma_inf, default_samples,
                                      grid_pairs)
    from gaussvarlp.varlebesgue import luxemburg_norm

    if check_exponent:
        samples = default_samples(spec.d)
        samples = samples[np.any(samples != 0, axis=1)]
        if not check_p_gamma_inf(p, samples).passed:
            raise PreconditionError("exponent fails the P^inf_gamma check")
        if not check_lh0(p, grid_pairs(spec.d)).passed:
            raise PreconditionError("exponent fails the LH0 check")
    ratios, nf, ntf, labels, flags = [], [], [], [], set()
    for k, f in enumerate(test_family):
        fv = f(scheme.nodes)
        norm_f = luxemburg_norm(p, fv, scheme).value
        if not norm_f > 0:
            raise PreconditionError(f"test function {k} has zero norm on the scheme")
        if values is None:
            res = evaluate(spec, f, scheme.nodes, estimate_error=False)
            tv = res.values
            flags.update(res.flags)
        else:
            tv = values[k]
        norm_t = luxemburg_norm(p, tv, scheme).value
        ratios.append(norm_t / norm_f)
        nf.append(norm_f)
        ntf.append(norm_t)
        labels.append(getattr(f, "label", f"f{k}"))
    ratios = np.asarray(ratios)
    return NormEstimate(float(np.max(ratios)), ratios, tuple(labels), np.asarray(nf),
                        np.asarray(ntf), tuple(sorted(flags)))


def standard_family(name: str = "standard10", d: int = 2) -> list[ScalarField]:
    """Named test families.

    ``standard10`` (``d = 2``): four Hermite polynomials of degree 1 to 4,
    two Hermite polynomials damped by ``exp(-|y|^2 / 4)``, ball indicators
    centred at distance 0, 2 and 4, and a narrow bump.
    """
    if name != "standard10":
        raise PreconditionError(f"unknown test family {name!r}")
    if d != 2:
        raise PreconditionError("standard10 is defined for d = 2")
    return [
        hermite_field((1, 0)),
        hermite_field((1, 1)),
        hermite_field((2, 1)),
        hermite_field((2, 2)),
        hermite_field((2, 0), kappa=0.25),
        hermite_field((3, 1), kappa=0.25),
        ball_indicator((0.0, 0.0), 1.0),
        ball_indicator((2.0, 0.0), 0.5),
        ball_indicator((0.0, 4.0), 0.5),
        gaussian_bump((1.0, 0.5), 0.3),
    ]
