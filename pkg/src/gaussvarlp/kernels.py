"""Profile functions, the kernels of ``T_{F,m}`` / ``Tbar_{F,m}`` and their bounds.

With ``t = 1 - r^2`` both kernels read

    K(x, y) = 1/2 int_0^1 psi_m(t) F(arg(x, y, t)) exp(-u(t)) t^{-d/2-1} dt,
    u(t) = |y - sqrt(1-t) x|^2 / t,

where ``arg = (y - sqrt(1-t) x)/sqrt(t)`` for the general variant and
``(x - sqrt(1-t) y)/sqrt(t)`` for the alternative one. The t-integral is
split at ``t = 1/2``: ``(0, 1/2]`` is integrated in ``tau = log t``, where
the ``exp(-c/t)`` onset becomes a smooth double-exponential ramp, and
``[1/2, 1)`` in ``w = -log(1 - t)``, which turns the logarithmic endpoint
behaviour of ``psi_m`` into an exponentially decaying integrand.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Callable

import numpy as np
from scipy import integrate, optimize
from scipy.special import roots_genlaguerre

from gaussvarlp.errors import PreconditionError
from gaussvarlp.geometry import admissibility_radius, global_quantities_batch
from gaussvarlp.quadrature import (QuadratureScheme, composite_gauss_legendre,
                                   gauss_hermite_tensor)

__all__ = [
    "GENERAL",
    "ALTERNATIVE",
    "ProfileFunction",
    "hermite_profile",
    "expression_profile",
    "verify_orthogonality",
    "growth_report",
    "certify",
    "require_certified",
    "profile_phi",
    "profile_psi",
    "log_psi",
    "KernelEvalReport",
    "kernel_eval",
    "kernel_values",
    "kernel_bound_check",
    "bound_log",
    "bound_ratios",
    "sample_global_pairs",
    "alpha_inf",
    "majorant_P",
    "cz_kernel",
    "ThetaValue",
    "theta_profile",
    "ORTHOGONALITY_TOL",
    "THETA_FLOOR",
]

GENERAL = "general"
ALTERNATIVE = "alternative"
ORTHOGONALITY_TOL = 1e-8
THETA_FLOOR = -1e12
# exp(-745) underflows; below this onset the t-integrand is negligible
_ONSET = 745.0


@dataclass(frozen=True)
class ProfileFunction:
    """The ``C^1`` profile ``F`` of a Gaussian singular integral.

    ``orthogonality_residual`` and ``growth`` are filled by :func:`certify`.
    """

    d: int
    eval: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    grad: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    label: str = "F"
    degree: int | None = None
    parity: str = "none"
    params: dict = field(default_factory=dict)
    orthogonality_residual: float | None = None
    growth: dict = field(default_factory=dict)

    def __call__(self, z) -> np.ndarray:
        return self.eval(np.atleast_2d(np.asarray(z, dtype=float)))

    def describe(self) -> dict:
        return {"label": self.label, **self.params,
                "orthogonality_residual": self.orthogonality_residual,
                "growth": {str(k): v for k, v in self.growth.items()}}


def _hermite_1d_and_derivative(k, z):
    # physicists' recurrence: H_{n+1} = 2 z H_n - 2 n H_{n-1}, H_n' = 2 n H_{n-1}
    h_prev, h = np.zeros_like(z), np.ones_like(z)
    for n in range(k):
        h_prev, h = h, 2.0 * z * h - 2.0 * n * h_prev
    return h, 2.0 * k * h_prev


def hermite_profile(indices, coeffs, d: int | None = None) -> ProfileFunction:
    """``F = sum_k c_k prod_i H_{alpha_{k,i}}(z_i)`` (physicists' Hermite).

    The config form ``{"hermite": [[1, 0], [0, 2]], "coeffs": [1.0, 0.5]}``
    maps directly onto ``indices`` and ``coeffs``.
    """
    indices = [tuple(int(a) for a in alpha) for alpha in indices]
    coeffs = [float(c) for c in coeffs]
    if len(indices) != len(coeffs) or not indices:
        raise PreconditionError("hermite indices and coeffs must be nonempty and match")
    d = len(indices[0]) if d is None else d
    if any(len(a) != d for a in indices):
        raise PreconditionError("every multi-index must have length d")

    def ev(z):
        out = np.zeros(z.shape[0])
        for alpha, c in zip(indices, coeffs):
            term = np.full(z.shape[0], c)
            for i, k in enumerate(alpha):
                if k:
                    term = term * _hermite_1d_and_derivative(k, z[:, i])[0]
            out += term
        return out

    def gr(z):
        out = np.zeros(z.shape)
        for alpha, c in zip(indices, coeffs):
            vals = [_hermite_1d_and_derivative(k, z[:, i]) for i, k in enumerate(alpha)]
            for j in range(d):
                term = np.full(z.shape[0], c)
                for i, (h, dh) in enumerate(vals):
                    term = term * (dh if i == j else h)
                out[:, j] += term
        return out

    parities = {sum(a) % 2 for a in indices}
    parity = "none" if len(parities) > 1 else ("odd" if parities == {1} else "even")
    label = " + ".join(f"{c:g}*H{list(a)}" for a, c in zip(indices, coeffs))
    return ProfileFunction(d, ev, gr, label, max(sum(a) for a in indices), parity,
                           {"hermite": [list(a) for a in indices], "coeffs": coeffs})


def expression_profile(source: str, d: int) -> ProfileFunction:
    """Profile from an arithmetic expression in ``x1..xd``."""
    import sympy as sp

    from gaussvarlp.expr import compile_expression

    compiled = compile_expression(source, d, field="profile.source")
    syms = sorted(compiled.expr.free_symbols, key=str)
    degree = None
    try:
        if compiled.expr.is_polynomial(*syms):
            degree = int(sp.Poly(compiled.expr, *syms).total_degree()) if syms else 0
    except (sp.PolynomialError, ValueError):
        degree = None
    neg = compiled.expr.subs({s: -s for s in syms}, simultaneous=True)
    parity = "none"
    if sp.simplify(neg + compiled.expr) == 0:
        parity = "odd"
    elif sp.simplify(neg - compiled.expr) == 0:
        parity = "even"
    return ProfileFunction(d, compiled.value, compiled.gradient, source, degree, parity,
                           {"source": source})


def verify_orthogonality(F: ProfileFunction, scheme: QuadratureScheme | None = None) -> float:
    """``int F d(gamma_d)`` by tensor Gauss-Hermite quadrature."""
    if scheme is None:
        scheme = gauss_hermite_tensor(F.d, 64 if F.d <= 2 else 24)
    if scheme.kind != "gauss_hermite_tensor":
        raise PreconditionError("orthogonality is verified on a Gauss-Hermite scheme")
    return scheme.integrate(F.eval(scheme.nodes))


def growth_report(F: ProfileFunction, eps_values=(0.05, 0.1, 0.25, 0.5),
                  samples=None) -> dict:
    """``eps -> max |F(z)| e^{-eps |z|^2}`` and the same for ``|grad F|``."""
    if samples is None:
        g = np.linspace(-12.0, 12.0, 97 if F.d <= 2 else 25)
        samples = np.stack([m.ravel() for m in np.meshgrid(*([g] * F.d),
                                                           indexing="ij")], -1)
    z2 = np.sum(samples**2, axis=1)
    fv = np.abs(F.eval(samples))
    gv = np.linalg.norm(F.grad(samples), axis=1)
    return {float(e): {"F": float(np.max(fv * np.exp(-e * z2))),
                       "grad": float(np.max(gv * np.exp(-e * z2)))}
            for e in eps_values}


def certify(F: ProfileFunction, scheme=None) -> ProfileFunction:
    return replace(F, orthogonality_residual=verify_orthogonality(F, scheme),
                   growth=growth_report(F))


def require_certified(F: ProfileFunction) -> ProfileFunction:
    """Return ``F`` with its certificate, raising if ``F`` is not orthogonal."""
    if F.orthogonality_residual is None:
        F = certify(F)
    if abs(F.orthogonality_residual) > ORTHOGONALITY_TOL:
        raise PreconditionError(
            f"profile {F.label!r} violates int F dgamma = 0 "
            f"(residual {F.orthogonality_residual:.3g})")
    bad = [e for e, g in F.growth.items()
           if not (np.isfinite(g["F"]) and np.isfinite(g["grad"]))]
    if bad:
        raise PreconditionError(f"profile growth is not finite for eps in {bad}")
    return F


def _check_variant(variant):
    if variant not in (GENERAL, ALTERNATIVE):
        raise PreconditionError(f"unknown variant {variant!r}")


def log_psi(t, omt, lomt, m: int, d: int, variant: str) -> np.ndarray:
    """``log psi_m(t)`` from ``t``, ``1 - t`` and ``log(1 - t)``.

    ``psi_m(t) = phi_m(sqrt(1-t)) / sqrt(1-t)``, i.e.
    ``(-log(1-t) / (2t))^{(m-2)/2} (1-t)^{e/2}`` with ``e = d - 2``
    (alternative) or ``e = m - 2`` (general).
    """
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(t > 0, -lomt / (2.0 * np.where(t > 0, t, 1.0)), 0.5)
        out = 0.5 * (m - 2) * np.log(ratio)
    e = d - 2 if variant == ALTERNATIVE else m - 2
    if e:
        out = out + 0.5 * e * lomt
    return out


def profile_psi(t, m: int, d: int, variant: str = ALTERNATIVE) -> np.ndarray:
    _check_variant(variant)
    t = np.asarray(t, dtype=float)
    if np.any((t <= 0) | (t >= 1)):
        raise PreconditionError("psi_m is defined for t in (0, 1)")
    return np.exp(log_psi(t, 1.0 - t, np.log1p(-t), m, d, variant))


def profile_phi(r, m: int, d: int, variant: str = ALTERNATIVE) -> np.ndarray:
    """``phi_m(r) = (-log r / (1 - r^2))^{(m-2)/2} r^{k}``, ``k = d-1`` or ``m-1``."""
    _check_variant(variant)
    r = np.asarray(r, dtype=float)
    if np.any((r <= 0) | (r >= 1)):
        raise PreconditionError("phi_m is defined for r in (0, 1)")
    one_minus_r2 = (1.0 - r) * (1.0 + r)
    # near r = 1 use -log r = -log1p(r - 1) to keep the ratio -> 1/2 accurate
    ratio = -np.log1p(r - 1.0) / one_minus_r2
    k = d - 1 if variant == ALTERNATIVE else m - 1
    return ratio ** (0.5 * (m - 2)) * r**k


@dataclass(frozen=True)
class KernelEvalReport:
    """Kernel value at a pair with its error estimate and bound comparison."""

    value: float
    abs_error_estimate: float
    t_subdivisions: int
    bound_b_le_0: float | None = None
    bound_b_gt_0: float | None = None
    ratio_to_bound: float | None = None
    flags: tuple = ()

    def to_dict(self) -> dict:
        return dict(self.__dict__, flags=list(self.flags))


def _onset_t(x, y):
    """Largest ``t`` below which ``u(t) >= 745`` is guaranteed."""
    dist = np.linalg.norm(y - x, axis=-1)
    nx = np.linalg.norm(x, axis=-1)
    # for t <= dist / (2|x|): |y - sqrt(1-t) x| >= dist - t|x| >= dist / 2
    with np.errstate(divide="ignore"):
        cap = np.where(nx > 0, dist / (2.0 * nx), np.inf)
    return np.minimum(np.minimum(dist**2 / (4.0 * _ONSET), cap), 0.45)


def _integrand_log_parts(x, y, t, omt, lomt, m, d, variant):
    """Return ``(log magnitude without F, F-argument)`` for nodes ``t``.

    ``x``, ``y`` have shape ``(..., d)`` and ``t`` shape ``(..., k)``.
    """
    r = np.sqrt(omt)[..., None]
    st = np.sqrt(t)[..., None]
    xe = x[..., None, :]
    ye = y[..., None, :]
    diff = ye - r * xe
    u = np.sum(diff * diff, axis=-1) / t
    if variant == ALTERNATIVE:
        arg = (xe - r * ye) / st
    else:
        arg = diff / st
    logmag = log_psi(t, omt, lomt, m, d, variant) - u - (0.5 * d + 1.0) * np.log(t)
    return logmag, arg


def kernel_eval(x, y, F: ProfileFunction, m: int, variant: str = ALTERNATIVE,
                tol: float = 1e-10, limit: int = 400) -> KernelEvalReport:
    """Adaptive evaluation of the kernel at one pair ``(x, y)``.

    QUADPACK is run separately on the ``tau`` and ``w`` pieces with relative
    tolerance ``tol`` and an absolute floor of ``1e-3 tol`` times the
    integral of ``|integrand|`` (estimated on a fixed rule), so that values
    cancelling to zero terminate. The report's flag is set whenever QUADPACK
    signals that the tolerance was not reached.

    Raises
    ------
    PreconditionError
        On the diagonal ``x = y``, where the kernel is not integrable.
    """
    _check_variant(variant)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x.size
    if np.allclose(x, y, rtol=0, atol=0):
        raise PreconditionError("the kernel is singular on the diagonal x = y")
    tau_lo = float(np.log(_onset_t(x, y)))
    tau_hi = math.log(0.5)

    def f_tau(tau):
        t = np.array([math.exp(tau)])
        lm, arg = _integrand_log_parts(x, y, t, 1.0 - t, np.log1p(-t), m, d, variant)
        return float(0.5 * np.exp(lm[0] + tau) * F.eval(arg)[0])

    def f_w(w):
        omt = np.array([math.exp(-w)])
        t = np.array([-math.expm1(-w)])
        lm, arg = _integrand_log_parts(x, y, t, omt, np.array([-w]), m, d, variant)
        return float(0.5 * np.exp(lm[0] - w) * F.eval(arg)[0])

    scale = float(np.abs(kernel_values(x[None], y[None], F, m, variant,
                                       absolute=True))[0])
    epsabs = 1e-3 * tol * scale
    total, err, nsub, flags = 0.0, 0.0, 0, []
    for fn, a, b in ((f_tau, tau_lo, tau_hi), (f_w, math.log(2.0), np.inf)):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            res = integrate.quad(fn, a, b, epsabs=epsabs, epsrel=tol, limit=limit,
                                 full_output=1)
        total += res[0]
        err += res[1]
        nsub += int(res[2]["last"])
        if len(res) > 3:
            flags.append(f"quadpack: {res[3].splitlines()[0][:80]}")
    return KernelEvalReport(float(total), float(err), nsub, flags=tuple(flags))


_TAU_PANELS, _TAU_ORDER = 24, 8
_W_EDGES = np.array([math.log(2.0), 1.5, 3.0, 5.0, 8.0, 12.0, 18.0, 27.0, 40.0])
_W_ORDER = 8


def kernel_values(x, y, F: ProfileFunction, m: int, variant: str = ALTERNATIVE,
                  tau_panels: int = _TAU_PANELS, order: int = _TAU_ORDER,
                  absolute: bool = False, chunk: int = 2048) -> np.ndarray:
    """Vectorised kernel at pairs ``x[i], y[i]`` on a fixed composite rule.

    The ``tau`` interval ``[log t_onset(x, y), log 1/2]`` is cut into
    ``tau_panels`` Gauss-Legendre panels per pair; ``w`` uses fixed panels
    on ``[log 2, 40]``. With ``absolute=True`` returns ``int |integrand|``.
    """
    _check_variant(variant)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    n, d = x.shape
    out = np.empty(n)
    wn, ww = composite_gauss_legendre(_W_EDGES, _W_ORDER)
    for s in range(0, n, chunk):
        xs, ys = x[s:s + chunk], y[s:s + chunk]
        k = xs.shape[0]
        tau_lo = np.log(_onset_t(xs, ys))
        edges = np.linspace(tau_lo, math.log(0.5), tau_panels + 1, axis=-1)
        tn, tw = composite_gauss_legendre(edges, order)
        t_a = np.exp(tn)
        omt_a = 1.0 - t_a
        lomt_a = np.log1p(-t_a)
        omt_b = np.broadcast_to(np.exp(-wn), (k, wn.size))
        t_b = -np.expm1(-np.broadcast_to(wn, (k, wn.size)))
        lomt_b = -np.broadcast_to(wn, (k, wn.size))
        t = np.concatenate([t_a, t_b], axis=1)
        omt = np.concatenate([omt_a, omt_b], axis=1)
        lomt = np.concatenate([lomt_a, lomt_b], axis=1)
        logjac = np.concatenate([tn, -np.broadcast_to(wn, (k, wn.size))], axis=1)
        weights = np.concatenate([tw, np.broadcast_to(ww, (k, ww.size))], axis=1)
        lm, arg = _integrand_log_parts(xs, ys, t, omt, lomt, m, d, variant)
        fv = F.eval(arg.reshape(-1, d)).reshape(lm.shape)
        if absolute:
            fv = np.abs(fv)
        out[s:s + chunk] = 0.5 * np.sum(weights * np.exp(lm + logjac) * fv, axis=1)
    return out


def bound_log(x, y, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Logarithm of the global kernel bound (with ``C_eps = 1``) and ``b``.

    ``b <= 0``: ``-|y|^2 + eps |x|^2``.
    ``b > 0``:  ``eps (|x|^2 - |y|^2) - (1 - eps) u(t0) - (d/2) log t0``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    d = x.shape[1]
    nx2 = np.sum(x * x, axis=1)
    ny2 = np.sum(y * y, axis=1)
    a, b, t0, u0 = global_quantities_batch(x, y)
    case_i = -ny2 + eps * nx2
    with np.errstate(divide="ignore", invalid="ignore"):
        r0 = np.sqrt(1.0 - t0)[:, None]
        ut0 = np.sum((y - r0 * x) ** 2, axis=1) / t0
        case_ii = eps * (nx2 - ny2) - (1.0 - eps) * ut0 - 0.5 * d * np.log(t0)
    return np.where(b > 0, case_ii, case_i), b


def _require_global(x, y, scale_const):
    x = np.atleast_2d(x)
    y = np.atleast_2d(y)
    local = np.linalg.norm(x - y, axis=1) < scale_const * admissibility_radius(x)
    if np.any(local):
        raise PreconditionError("kernel bounds hold only in the global region "
                                "|x - y| >= C_d m(x)")


def _require_eps(eps, b, d):
    if np.any(b <= 0) and not (0 < eps < 1):
        raise PreconditionError("case b <= 0 requires 0 < eps < 1")
    if np.any(b > 0) and not (0 < eps < 1.0 / d):
        raise PreconditionError("case b > 0 requires 0 < eps < 1/d")


def kernel_bound_check(x, y, F: ProfileFunction, m: int, eps: float,
                       variant: str = ALTERNATIVE, scale_const: float | None = None,
                       tol: float = 1e-10) -> KernelEvalReport:
    """Compare ``|Kbar(x, y)|`` with the global bound expression at one pair."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x.size
    _require_global(x, y, d if scale_const is None else scale_const)
    lb, b = bound_log(x, y, eps)
    _require_eps(eps, b, d)
    rep = kernel_eval(x, y, F, m, variant, tol)
    bound = float(np.exp(lb[0]))
    ratio = abs(rep.value) / bound
    if b[0] > 0:
        return replace(rep, bound_b_gt_0=bound, ratio_to_bound=ratio)
    return replace(rep, bound_b_le_0=bound, ratio_to_bound=ratio)


def bound_ratios(x, y, F: ProfileFunction, m: int, eps: float,
                 variant: str = ALTERNATIVE, scale_const: float | None = None,
                 kernel: np.ndarray | None = None):
    """Batch version: returns ``(ratio, b, kernel, bound)`` arrays."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    d = x.shape[1]
    _require_global(x, y, d if scale_const is None else scale_const)
    lb, b = bound_log(x, y, eps)
    _require_eps(eps, b, d)
    if kernel is None:
        kernel = kernel_values(x, y, F, m, variant)
    # ratio in log space: bounds can underflow for |y| large
    with np.errstate(divide="ignore"):
        ratio = np.exp(np.log(np.abs(kernel)) - lb)
    return ratio, b, kernel, np.exp(lb)


def _unit_rows(g):
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


def sample_global_pairs(n: int, d: int = 2, regime: str = "b_gt_0", seed: int = 0,
                        scale_const: float | None = None, r_max: float = 8.0,
                        rho_span: float = 4.0, rho_power: float = 6.0,
                        radial_power: float | None = None,
                        angle_power: float = 3.0) -> tuple[np.ndarray, np.ndarray]:
    """Scrambled-Sobol pairs in the global region, restricted to one sign of ``b``.

    Pairs are ``y = x + C_d m(x) rho e`` with ``rho >= 1``. The parameters are
    clustered by power maps toward the edges of the parameter domain, where
    the kernel-to-bound ratio peaks:

    * ``rho = 1 + rho_span u^rho_power`` (the global-region boundary);
    * ``b <= 0``: ``|x| = sqrt(C_d rho) (1 - u^radial_power)``, the largest
      radius for which ``b <= 0`` is reachable, and ``cos(x, e)`` clustered
      toward the value where ``b = 0``;
    * ``b > 0``: ``|x| = r_max (1 - u^radial_power)`` and ``cos(x, e)``
      uniform on its admissible range.

    The first ``k`` pairs of a draw of ``n`` are the draw of ``k``, so the
    running maximum over growing samples is nondecreasing.
    """
    from scipy.stats import norm, qmc

    if regime not in ("b_le_0", "b_gt_0"):
        raise PreconditionError("regime must be 'b_le_0' or 'b_gt_0'")
    C = float(d) if scale_const is None else float(scale_const)
    if radial_power is None:
        radial_power = 3.0 if regime == "b_le_0" else 4.0
    engine = qmc.Sobol(3 + 2 * d, scramble=True, seed=seed)
    xs, ys, got = [], [], 0
    while got < n:
        u = np.clip(engine.random(4096), 1e-12, 1.0 - 1e-12)
        xhat = _unit_rows(norm.ppf(u[:, 3:3 + d]))
        v = norm.ppf(u[:, 3 + d:3 + 2 * d])
        v = _unit_rows(v - np.sum(v * xhat, axis=1, keepdims=True) * xhat)
        rho = 1.0 + rho_span * u[:, 1] ** rho_power
        if regime == "b_le_0":
            rx = np.sqrt(C * rho) * (1.0 - u[:, 0] ** radial_power)
        else:
            rx = r_max * (1.0 - u[:, 0] ** radial_power)
        m = np.minimum(1.0, 1.0 / np.maximum(rx, 1e-300))
        # b = 2|x|(|x| + C m rho cos) vanishes at cos = c0
        c0 = -rx / (C * m * rho)
        if regime == "b_le_0":
            c = c0 - (c0 + 1.0) * u[:, 2] ** angle_power
        else:
            lo = np.maximum(c0, -1.0)
            c = lo + (1.0 - lo) * u[:, 2]
        e = c[:, None] * xhat + np.sqrt(np.maximum(1.0 - c * c, 0.0))[:, None] * v
        x = rx[:, None] * xhat
        # nudge off the boundary so rounding never lands inside B_h(x)
        y = x + (C * m * rho * (1.0 + 1e-12))[:, None] * e
        b = 2.0 * np.sum(x * y, axis=1)
        ok = (b <= 0) if regime == "b_le_0" else (b > 0)
        ok &= np.linalg.norm(x - y, axis=1) >= C * admissibility_radius(x)
        xs.append(x[ok])
        ys.append(y[ok])
        got += int(ok.sum())
    return np.concatenate(xs)[:n], np.concatenate(ys)[:n]


def alpha_inf(eps: float, p_inf: float, p_plus: float | None = None) -> float:
    """``(1-eps)/2 - |1/p_inf - eps - (1-eps)/2|``; requires ``eps < 1/p_inf``.

    Raises
    ------
    PreconditionError
        Unless ``0 < eps < min(1/p_inf, 1/p_plus)``.
    """
    limit = 1.0 / p_inf if p_plus is None else min(1.0 / p_inf, 1.0 / p_plus)
    if not (0 < eps < limit):
        raise PreconditionError(
            f"eps = {eps} must satisfy 0 < eps < min(1/p_inf, 1/p_plus) = {limit:.6g}")
    val = 0.5 * (1.0 - eps) - abs(1.0 / p_inf - eps - 0.5 * (1.0 - eps))
    if val <= 0:
        raise PreconditionError(f"alpha_inf = {val} is not positive")
    return val


def majorant_P(x, y, alpha: float) -> np.ndarray:
    """``P(x, y) = |x + y|^d exp(-alpha |x + y| |x - y|)``, broadcasting."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x.shape[-1]
    s = np.linalg.norm(x + y, axis=-1)
    return s**d * np.exp(-alpha * s * np.linalg.norm(x - y, axis=-1))


def cz_kernel(x, F: ProfileFunction, order: int = 64) -> np.ndarray | float:
    """Convolution kernel ``K(x) = int_0^inf F(-x/sqrt t) e^{-|x|^2/t} t^{-d/2-1} dt``.

    After ``s = |x|^2 / t``,
    ``K(x) = |x|^{-d} int_0^inf F(-sqrt(s) xhat) e^{-s} s^{d/2-1} ds``.
    The part of ``F(-sqrt(s) xhat)`` even in ``sqrt(s)`` is integrated with
    generalized Gauss-Laguerre weight ``s^{d/2-1}``; the odd part, divided by
    ``sqrt(s)``, with weight ``s^{d/2-1/2}``. Both are exact for polynomial F
    of degree below ``2 * order``.

    Raises
    ------
    PreconditionError
        At ``x = 0``.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    n, d = x.shape
    r = np.linalg.norm(x, axis=1)
    if np.any(r == 0):
        raise PreconditionError("the convolution kernel is singular at x = 0")
    xhat = x / r[:, None]
    s_e, w_e = roots_genlaguerre(order, 0.5 * d - 1.0)
    s_o, w_o = roots_genlaguerre(order, 0.5 * d - 0.5)

    def F_ray(s):
        q = np.sqrt(s)
        pts_m = -q[None, :, None] * xhat[:, None, :]
        fm = F.eval(pts_m.reshape(-1, d)).reshape(n, -1)
        fp = F.eval((-pts_m).reshape(-1, d)).reshape(n, -1)
        return fm, fp, q

    fm, fp, _ = F_ray(s_e)
    even = 0.5 * (fm + fp) @ w_e
    fm, fp, q = F_ray(s_o)
    odd = (0.5 * (fm - fp) / q[None, :]) @ w_o
    out = (even + odd) / r**d
    return float(out[0]) if single else out


@dataclass(frozen=True)
class ThetaValue:
    t: float
    value: float
    unbounded: bool
    argmin: np.ndarray

    def to_dict(self) -> dict:
        return {"t": self.t, "theta": "-inf" if self.unbounded else self.value,
                "unbounded_flag": self.unbounded, "argmin": self.argmin.tolist()}


def theta_profile(F: ProfileFunction, t_values, n_random: int = 8, seed: int = 0,
                  floor: float = THETA_FLOOR) -> list[ThetaValue]:
    """``Theta(t) = inf_{Omega_t} F / t^2`` with ``Omega_t = {min_i |z_i| >= t}``.

    ``Omega_t`` is the union of the ``2^d`` closed orthant corners
    ``z = s * (t + v)``, ``v >= 0``. Each corner is searched by L-BFGS-B from
    the corner point and ``n_random`` seeded starts, after a ray probe along
    every coordinate direction and the diagonal out to ``|v| = 1e13``. A value
    below ``floor`` sets the unbounded flag.
    """
    rng = np.random.default_rng(seed)
    d = F.d
    out = []
    for t in np.atleast_1d(np.asarray(t_values, dtype=float)):
        if t <= 0:
            raise PreconditionError("t values must be positive")
        best, best_z, unbounded = np.inf, None, False
        dirs = np.vstack([np.eye(d), np.ones((1, d)) / np.sqrt(d)])
        lam = 10.0 ** np.arange(0, 14)
        for signs in product((-1.0, 1.0), repeat=d):
            s = np.asarray(signs)
            probe_v = (lam[:, None, None] * dirs[None, :, :]).reshape(-1, d)
            probe_z = s * (t + probe_v)
            vals = F.eval(probe_z)
            k = int(np.argmin(vals))
            if vals[k] < best:
                best, best_z = float(vals[k]), probe_z[k]
            if best < floor:
                unbounded = True
                break

            def obj(v, s=s):
                z = s * (t + v)
                return float(F.eval(z[None])[0]), s * F.grad(z[None])[0]

            starts = [np.zeros(d)] + [rng.exponential(max(t, 1.0), d)
                                      for _ in range(n_random)]
            for v0 in starts:
                res = optimize.minimize(obj, v0, jac=True, method="L-BFGS-B",
                                        bounds=[(0.0, None)] * d)
                if res.fun < best:
                    best, best_z = float(res.fun), s * (t + res.x)
                if best < floor:
                    unbounded = True
                    break
            if unbounded:
                break
        out.append(ThetaValue(float(t), -np.inf if unbounded else best / t**2,
                              unbounded, np.asarray(best_z)))
    return out
