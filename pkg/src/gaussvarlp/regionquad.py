"""Gaussian-weighted planar integrals over intersections of discs and complements.

Computes

    int_{R^2} g(w) exp(-|w|^2) prod_j chi_j(w) dw,

where each ``chi_j`` is the indicator of a disc ``|w - beta_j| < rho_j`` or
of its complement. In polar coordinates around the origin the admissible
angles at radius ``s`` form an arc per constraint (law of cosines); arcs are
intersected exactly and integrated by Gauss-Legendre. The radial variable is
split at the tangency radii ``| |beta| - rho |`` and ``|beta| + rho`` where
the arc length has square-root behaviour, and each panel uses a
cosine-mapped Gauss-Legendre rule.
"""

from __future__ import annotations

import numpy as np

from gaussvarlp.quadrature import cosine_mapped_legendre, gauss_legendre

__all__ = ["S_MAX", "disc_region_integral", "arc_intervals"]

# exp(-6.5^2) ~ 5e-19: the Gaussian window beyond this radius is negligible
S_MAX = 6.5
_TWO_PI = 2.0 * np.pi


def _arc(s, beta_norm, beta_angle, rho, inside):
    """Arc ``[lo, hi]`` of admissible angles at radii ``s``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (s * s + beta_norm**2 - rho**2) / (2.0 * s * beta_norm)
    # disc centred at the origin: all or nothing
    c = np.where(beta_norm == 0, np.where(s < rho, -np.inf, np.inf), c)
    h = np.arccos(np.clip(c, -1.0, 1.0))
    if inside:
        return beta_angle - h, beta_angle + h
    return beta_angle + h, beta_angle + _TWO_PI - h


def arc_intervals(s, betas, rhos, inside):
    """Intersected admissible angular intervals at radii ``s``.

    Parameters
    ----------
    s : ndarray, shape (B, N)
    betas : ndarray, shape (B, k, 2)
    rhos : ndarray, shape (B, k)
    inside : sequence of bool, length k (1 or 2)

    Returns
    -------
    lo, length : ndarrays of shape (B, N, q)
        ``q = 1`` for one constraint, ``3`` for two (one per ``2 pi`` shift).
    """
    norms = np.linalg.norm(betas, axis=-1)
    angles = np.arctan2(betas[..., 1], betas[..., 0])
    arcs = [_arc(s, norms[:, j, None], angles[:, j, None], rhos[:, j, None], inside[j])
            for j in range(len(inside))]
    if len(arcs) == 1:
        lo, hi = arcs[0]
        return lo[..., None], (hi - lo)[..., None]
    (a1, a2), (b1, b2) = arcs
    # bring the second arc's midpoint within pi of the first
    shift = _TWO_PI * np.round(((a1 + a2) - (b1 + b2)) / (2.0 * _TWO_PI))
    b1, b2 = b1 + shift, b2 + shift
    sh = np.array([-_TWO_PI, 0.0, _TWO_PI])
    lo = np.maximum(a1[..., None], b1[..., None] + sh)
    hi = np.minimum(a2[..., None], b2[..., None] + sh)
    return lo, np.maximum(hi - lo, 0.0)


def _crossing_radii(betas, rhos):
    """Norms of the two boundary-circle intersection points (0 if none).

    The intersected arc length has a kink at these radii.
    """
    b1, b2 = betas[:, 0], betas[:, 1]
    r1, r2 = rhos[:, 0], rhos[:, 1]
    delta = b2 - b1
    dist = np.linalg.norm(delta, axis=-1)
    ok = (dist > 0) & (dist < r1 + r2) & (dist > np.abs(r1 - r2))
    safe = np.where(ok, dist, 1.0)
    a = (r1**2 - r2**2 + safe**2) / (2.0 * safe)
    h = np.sqrt(np.maximum(r1**2 - a**2, 0.0))
    e = delta / safe[:, None]
    perp = np.stack([-e[:, 1], e[:, 0]], -1)
    base = b1 + a[:, None] * e
    out = np.stack([np.linalg.norm(base + h[:, None] * perp, axis=-1),
                    np.linalg.norm(base - h[:, None] * perp, axis=-1)], -1)
    return np.where(ok[:, None], out, 0.0)


def disc_region_integral(g, betas, rhos, inside, n_radial: int = 12,
                         n_angular: int = 20, s_max: float = S_MAX,
                         n_panels: int = 6) -> np.ndarray:
    """Batch of constrained Gaussian integrals, one per leading index.

    Parameters
    ----------
    g : callable
        Maps points of shape ``(B, M, 2)`` to values ``(B, M)``.
    betas, rhos, inside
        Constraint discs, see :func:`arc_intervals`.

    Returns
    -------
    ndarray, shape (B,)
        Lebesgue integrals of ``g exp(-|w|^2)`` over the region.
    """
    betas = np.asarray(betas, dtype=float)
    rhos = np.asarray(rhos, dtype=float)
    B = betas.shape[0]
    norms = np.linalg.norm(betas, axis=-1)
    # radial range on which the admissible arc is neither empty nor cut off
    lo = np.zeros(B)
    hi = np.full(B, s_max)
    for j, ins in enumerate(inside):
        if ins:
            lo = np.maximum(lo, norms[:, j] - rhos[:, j])
            hi = np.minimum(hi, norms[:, j] + rhos[:, j])
        else:
            lo = np.maximum(lo, rhos[:, j] - norms[:, j])
    hi = np.maximum(hi, lo)
    breaks = [np.abs(norms - rhos), norms + rhos]
    if len(inside) == 2:
        breaks.append(_crossing_radii(betas, rhos))
    breaks = np.concatenate(breaks, axis=1)
    # uniform sub-panels keep panels short on the Gaussian scale
    uniform = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, n_panels + 1)
    edges = np.sort(np.concatenate(
        [uniform, np.clip(breaks, lo[:, None], hi[:, None])], axis=1), axis=1)
    s, ws = cosine_mapped_legendre(edges, n_radial)
    lo, length = arc_intervals(s, betas, rhos, inside)
    u, wu = gauss_legendre(n_angular)
    theta = lo[..., None] + length[..., None] * u
    wt = length[..., None] * wu
    N, q = s.shape[1], lo.shape[2]
    theta = theta.reshape(B, N, q * n_angular)
    wt = wt.reshape(B, N, q * n_angular)
    pts = np.stack([s[..., None] * np.cos(theta), s[..., None] * np.sin(theta)], -1)
    weights = (ws * s * np.exp(-s * s))[..., None] * wt
    vals = g(pts.reshape(B, -1, 2)).reshape(weights.shape)
    return np.sum(weights * vals, axis=(1, 2))
