"""Admissible balls, the local/global split and a certified covering family."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from gaussvarlp.errors import PreconditionError
from gaussvarlp.quadrature import QuadratureScheme, truncated_uniform

__all__ = [
    "LOCAL",
    "GLOBAL",
    "admissibility_radius",
    "AdmissibleBall",
    "classify_pair",
    "is_local",
    "GlobalQuantities",
    "global_quantities",
    "u_of_t",
    "MeasureResult",
    "gaussian_measure",
    "CoveringFamily",
    "CoveringCertificate",
    "build_covering",
]

LOCAL = "local"
GLOBAL = "global"


def admissibility_radius(x) -> np.ndarray | float:
    """``m(x) = min(1, 1/|x|)``; accepts a point or an ``(n, d)`` array."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    with np.errstate(divide="ignore"):
        m = np.minimum(1.0, 1.0 / r)
    return float(m) if m.ndim == 0 else m


@dataclass(frozen=True)
class AdmissibleBall:
    """Ball ``B(c, C_d m(c))``."""

    center: np.ndarray
    radius: float
    scale_const: float

    @classmethod
    def at(cls, center, scale_const: float) -> "AdmissibleBall":
        c = np.asarray(center, dtype=float)
        return cls(c, scale_const * admissibility_radius(c), float(scale_const))

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(points)
        return np.linalg.norm(pts - self.center, axis=1) < self.radius


def is_local(x, y, scale_const: float) -> np.ndarray:
    """Vectorised ``|x - y| < C_d m(x)``; the boundary belongs to the global part."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.linalg.norm(x - y, axis=-1) < scale_const * admissibility_radius(x)


def classify_pair(x, y, scale_const: float) -> str:
    return LOCAL if bool(is_local(x, y, scale_const)) else GLOBAL


@dataclass(frozen=True)
class GlobalQuantities:
    """``a = |x|^2 + |y|^2``, ``b = 2<x, y>`` and the minimiser data of ``u``."""

    a: float
    b: float
    t0: float
    u0: float

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "t0": self.t0, "u0": self.u0}


def u_of_t(x, y, t) -> np.ndarray:
    """``u(t) = |y - sqrt(1-t) x|^2 / t``, broadcasting over ``t``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    r = np.sqrt(1.0 - t)
    diff = y[..., None, :] - r[..., None] * x[..., None, :] if t.ndim else y - r * x
    return np.sum(diff * diff, axis=-1) / t


def _global_arrays(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx2 = np.sum(x * x, axis=-1)
    ny2 = np.sum(y * y, axis=-1)
    a = nx2 + ny2
    b = 2.0 * np.sum(x * y, axis=-1)
    # sqrt(a^2 - b^2) = |x + y| |x - y| avoids cancellation
    root = np.linalg.norm(x + y, axis=-1) * np.linalg.norm(x - y, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        t0 = 2.0 * root / (a + root)
    u0 = 0.5 * (ny2 - nx2 + root)
    return a, b, t0, u0


def global_quantities(x, y) -> GlobalQuantities:
    """Closed forms of ``a, b, t0, u0`` for one pair.

    Raises
    ------
    PreconditionError
        If ``x = y = 0`` (then ``a = 0``).
    """
    a, b, t0, u0 = _global_arrays(x, y)
    if a == 0:
        raise PreconditionError("global quantities are undefined for x = y = 0")
    return GlobalQuantities(float(a), float(b), float(t0), float(u0))


global_quantities_batch = _global_arrays


@dataclass(frozen=True)
class MeasureResult:
    value: float
    error_estimate: float


def gaussian_measure(region, scheme: QuadratureScheme | None = None,
                     d: int | None = None) -> MeasureResult:
    """``gamma_d(region)`` for an indicator oracle ``region(points) -> bool``.

    With no scheme a midpoint grid on ``[-7, 7]^d`` is used. The error
    estimate compares against the same rule on half as many cells per axis
    (uniform kind) or half the order (Gauss-Hermite kind).
    """
    from gaussvarlp.quadrature import gauss_hermite_tensor

    if scheme is None:
        if d is None:
            raise PreconditionError("either a scheme or a dimension is required")
        n = {1: 1400, 2: 700}.get(d, 70)
        scheme = truncated_uniform(d, 7.0, n)
    if scheme.measure != "gaussian":
        raise PreconditionError("gaussian_measure needs a Gaussian-weighted scheme")

    def q(s):
        return float(np.dot(s.weights, np.asarray(region(s.nodes), dtype=float)))

    value = q(scheme)
    if scheme.kind == "truncated_uniform":
        coarse = truncated_uniform(scheme.d, scheme.truncation_radius,
                                   max(scheme.order // 2, 1))
    else:
        coarse = gauss_hermite_tensor(scheme.d, max(scheme.order // 2, 1))
    return MeasureResult(min(max(value, 0.0), 1.0), abs(value - q(coarse)))


@dataclass(frozen=True)
class CoveringCertificate:
    """Measured properties of a covering family on a verification grid."""

    coverage_radius: float
    grid_n: int
    uncovered_points: int
    max_overlap: int
    max_overlap_dilated: int
    max_overlap_hat: int
    max_gaussian_ratio: float
    gaussian_ratio_bound: float
    hat_dilation: float

    @property
    def covers(self) -> bool:
        return self.uncovered_points == 0

    @property
    def equivalence_certified(self) -> bool:
        return self.max_gaussian_ratio <= self.gaussian_ratio_bound

    def to_dict(self) -> dict:
        return {**self.__dict__, "covers": self.covers,
                "equivalence_certified": self.equivalence_certified}


@dataclass(frozen=True)
class CoveringFamily:
    """Admissible balls on radial shells.

    ``ball_scale`` is the ratio ``radius / m(center)`` of every member.
    ``overlap_bound`` is the largest number of members containing a point of
    the verification grid used at construction.
    """

    centers: np.ndarray
    radii: np.ndarray
    scale_const: float
    coverage_radius: float
    ball_scale: float
    overlap_bound: int = 0
    shell_radii: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return self.centers.shape[0]

    @property
    def d(self) -> int:
        return self.centers.shape[1]

    def balls(self) -> list[AdmissibleBall]:
        return [AdmissibleBall(c, float(r), self.scale_const)
                for c, r in zip(self.centers, self.radii)]

    def counts(self, points, dilation: float = 1.0) -> np.ndarray:
        """Number of balls ``dilation * B`` containing each point (open balls)."""
        pts = np.atleast_2d(points)
        out = np.zeros(pts.shape[0], dtype=int)
        # members sharing a radius are queried together
        prad = np.linalg.norm(pts, axis=1)
        crad = np.linalg.norm(self.centers, axis=1)
        for r in np.unique(self.radii):
            sel = self.radii == r
            group = self.centers[sel]
            rq = dilation * r
            # only points in the annulus swept by this group can be hit
            near = np.flatnonzero((prad > crad[sel].min() - rq)
                                  & (prad < crad[sel].max() + rq))
            if near.size == 0:
                continue
            tree = cKDTree(group)
            # query_ball_point counts closed balls; shrink to get open ones
            out[near] += tree.query_ball_point(pts[near], rq * (1 - 1e-12),
                                               return_length=True)
        return out

    def covered(self, points) -> np.ndarray:
        """Membership in ``B(0, 1)`` or in some ``2B``."""
        pts = np.atleast_2d(points)
        inside_unit = np.linalg.norm(pts, axis=1) < 1.0
        return inside_unit | (self.counts(pts, 2.0) > 0)

    def gaussian_ratios(self) -> np.ndarray:
        """``max_B e^{-|x|^2} / min_B e^{-|x|^2}`` for every member, exactly."""
        c = np.linalg.norm(self.centers, axis=1)
        near = np.maximum(c - self.radii, 0.0)
        far = c + self.radii
        return np.exp(far**2 - near**2)

    def verify(self, grid_n: int = 400, hat_samples: int = 64,
               seed: int = 0) -> CoveringCertificate:
        """Check coverage, overlaps, Gaussian equivalence and the hat dilation."""
        R = self.coverage_radius
        d = self.d
        g = np.linspace(-R, R, grid_n)
        mesh = np.stack([m.ravel() for m in np.meshgrid(*([g] * d), indexing="ij")], -1)
        mesh = mesh[np.linalg.norm(mesh, axis=1) <= R]
        uncovered = int(np.count_nonzero(~self.covered(mesh)))
        hat = self.hat_dilation(hat_samples, seed)
        ratios = self.gaussian_ratios()
        cd = self.scale_const
        return CoveringCertificate(
            R, grid_n, uncovered,
            int(self.counts(mesh).max()),
            int(self.counts(mesh, 2.0).max()),
            int(self.counts(mesh, hat).max()),
            float(ratios.max()), float(np.exp(2.0 * cd * (1.0 + cd))), hat)

    def hat_dilation(self, samples_per_ball: int = 64, seed: int = 0) -> float:
        """Smallest ``C`` with ``B_h(x) subset C B`` for sampled ``x`` in each ``B``.

        The inclusion holds iff ``|x - c_B| + C_d m(x) <= C r_B``.
        """
        rng = np.random.default_rng(seed)
        d = self.d
        u = rng.standard_normal((samples_per_ball, d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        rad = rng.random(samples_per_ball) ** (1.0 / d)
        # include the boundary sphere, where the ratio is largest
        rad[: max(samples_per_ball // 4, 1)] = 1.0
        offsets = u * rad[:, None]
        worst = 0.0
        for c, r in zip(self.centers, self.radii):
            x = c + r * offsets
            val = (np.linalg.norm(x - c, axis=1)
                   + self.scale_const * admissibility_radius(x)) / r
            worst = max(worst, float(val.max()))
        return worst

    def to_json(self) -> str:
        return json.dumps([{"center": c.tolist(), "radius": float(r)}
                           for c, r in zip(self.centers, self.radii)])


def _sphere_directions(d: int, count: int) -> np.ndarray:
    if d == 2:
        theta = 2.0 * np.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(theta), np.sin(theta)], -1)
    if d == 3:
        # Fibonacci lattice
        k = np.arange(count) + 0.5
        z = 1.0 - 2.0 * k / count
        phi = np.pi * (1.0 + 5.0**0.5) * k
        s = np.sqrt(1.0 - z * z)
        return np.stack([s * np.cos(phi), s * np.sin(phi), z], -1)
    raise PreconditionError("covering construction supports d = 2 and d = 3")


def build_covering(coverage_radius: float, scale_const: float = 2.0, d: int = 2,
                   spacing: float = 0.5, ball_scale: float = 0.35,
                   verify_grid_n: int | None = None) -> CoveringFamily:
    """Admissible balls on nested shells covering ``{1 <= |x| <= R}`` by ``2B``.

    Shell radii satisfy ``rho_{k+1} = rho_k + spacing * m(rho_k)``; on each
    shell the centres are spaced about ``spacing * m(rho_k)`` apart and each
    ball has radius ``ball_scale * m(rho_k)``. Together with ``B(0, 1)``
    the dilated balls cover the ball of radius ``R``.

    Raises
    ------
    PreconditionError
        If ``R <= 0``, ``C_d <= 0`` or the parameters cannot cover.
    """
    R = float(coverage_radius)
    if R <= 0 or scale_const <= 0:
        raise PreconditionError("coverage radius and C_d must be positive")
    if ball_scale > scale_const:
        raise PreconditionError("member balls must lie inside admissible balls")
    # worst point sits half a step from the nearest centre in every direction
    if 2.0 * ball_scale <= 0.5 * spacing * np.sqrt(d) * (1.0 + spacing):
        raise PreconditionError("spacing too coarse for the dilated balls to cover")
    shells = [1.0]
    while shells[-1] < R + spacing * min(1.0, 1.0 / shells[-1]):
        rho = shells[-1]
        shells.append(rho + spacing * min(1.0, 1.0 / rho))
    if len(shells) < 2:
        raise PreconditionError("empty shell construction")
    centers, radii = [], []
    for rho in shells:
        m = min(1.0, 1.0 / rho)
        step = spacing * m
        if d == 2:
            count = int(np.ceil(2.0 * np.pi * rho / step))
        else:
            count = int(np.ceil(4.0 * np.pi * rho**2 / step**2))
        centers.append(rho * _sphere_directions(d, count))
        radii.append(np.full(count, ball_scale * m))
    fam = CoveringFamily(np.concatenate(centers), np.concatenate(radii),
                         float(scale_const), R, float(ball_scale), 0,
                         np.asarray(shells))
    if verify_grid_n:
        cert = fam.verify(verify_grid_n)
        fam = CoveringFamily(fam.centers, fam.radii, fam.scale_const, R,
                             fam.ball_scale, cert.max_overlap, fam.shell_radii)
    return fam
