"""Quadrature rules for Gaussian and truncated Lebesgue integrals.

All Gaussian rules integrate against the probability measure
``gamma_d(dx) = pi^{-d/2} exp(-|x|^2) dx``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss

from gaussvarlp.errors import ConfigError

__all__ = [
    "QuadratureScheme",
    "gauss_hermite_tensor",
    "truncated_uniform",
    "parse_scheme",
    "default_gh_order",
    "gauss_legendre",
    "composite_gauss_legendre",
    "cosine_mapped_legendre",
    "hermite_nodes",
]


@dataclass(frozen=True)
class QuadratureScheme:
    """Nodes and positive weights for integrals over ``R^d``.

    Attributes
    ----------
    kind : str
        ``"gauss_hermite_tensor"`` or ``"truncated_uniform"``.
    nodes : ndarray, shape (n, d)
    weights : ndarray, shape (n,)
        For ``measure == "gaussian"`` the weights integrate against
        ``gamma_d``; for ``"lebesgue"`` against ``dx`` on the truncation box.
    measure : str
    truncation_radius : float or None
        Half side of the box for the uniform kind.
    order : int
        Points per axis.
    """

    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    measure: str = "gaussian"
    truncation_radius: float | None = None
    order: int = 0
    log_weights: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.nodes.ndim != 2 or self.nodes.shape[0] != self.weights.shape[0]:
            raise ValueError("nodes must be (n, d) and match weights")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if self.log_weights is None:
            object.__setattr__(self, "log_weights", np.log(self.weights))
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def d(self) -> int:
        return self.nodes.shape[1]

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def describe(self) -> dict:
        out = {"kind": self.kind, "measure": self.measure, "order": self.order,
               "dimension": self.d, "size": self.size}
        if self.truncation_radius is not None:
            out["truncation_radius"] = self.truncation_radius
        return out


@lru_cache(maxsize=64)
def hermite_nodes(order: int):
    """1-d Gauss-Hermite nodes and probability weights for ``pi^{-1/2} e^{-x^2}``."""
    x, w = hermgauss(order)
    return x, w / np.sqrt(np.pi)


def gauss_hermite_tensor(d: int, order: int, prune: float = 0.0) -> QuadratureScheme:
    """Tensor-product Gauss-Hermite rule for ``gamma_d``.

    Parameters
    ----------
    d : int
        Dimension.
    order : int
        Points per axis.
    prune : float, optional
        Drop nodes whose weight is below ``prune`` times the largest weight.
        The dropped mass is returned to no one; with ``prune <= 1e-18`` the
        effect on smooth integrands of moderate growth is far below any
        tolerance used in this package.
    """
    if d < 1 or order < 1:
        raise ValueError("dimension and order must be positive")
    x, w = hermite_nodes(order)
    logw1 = np.log(w)
    grids = np.meshgrid(*([x] * d), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    lw = sum(np.meshgrid(*([logw1] * d), indexing="ij")).ravel()
    if prune > 0:
        keep = lw >= lw.max() + np.log(prune)
        nodes, lw = nodes[keep], lw[keep]
    return QuadratureScheme("gauss_hermite_tensor", np.ascontiguousarray(nodes),
                            np.exp(lw), "gaussian", None, order, lw)


def truncated_uniform(d: int, radius: float, n: int,
                      measure: str = "gaussian") -> QuadratureScheme:
    """Midpoint rule on the box ``[-radius, radius]^d`` with ``n`` cells per axis."""
    if measure not in ("gaussian", "lebesgue"):
        raise ValueError(f"unknown measure {measure!r}")
    h = 2.0 * radius / n
    x = -radius + h * (np.arange(n) + 0.5)
    grids = np.meshgrid(*([x] * d), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    lw = np.full(nodes.shape[0], d * np.log(h))
    if measure == "gaussian":
        lw = lw - 0.5 * d * np.log(np.pi) - np.sum(nodes**2, axis=1)
    return QuadratureScheme("truncated_uniform", nodes, np.exp(lw), measure,
                            float(radius), n, lw)


def default_gh_order(d: int) -> int:
    return 64 if d <= 2 else 24


def parse_scheme(text: str, d: int) -> QuadratureScheme:
    """Parse ``"gh:64"``, ``"gh"`` or ``"uniform:R:n[:lebesgue]"``."""
    parts = str(text).split(":")
    try:
        if parts[0] == "gh":
            order = int(parts[1]) if len(parts) > 1 else default_gh_order(d)
            return gauss_hermite_tensor(d, order)
        if parts[0] == "uniform":
            measure = parts[3] if len(parts) > 3 else "gaussian"
            return truncated_uniform(d, float(parts[1]), int(parts[2]), measure)
    except (IndexError, ValueError) as exc:
        raise ConfigError("scheme", f"cannot parse {text!r}: {exc}") from exc
    raise ConfigError("scheme", f"unknown scheme kind {parts[0]!r}")


@lru_cache(maxsize=64)
def gauss_legendre(order: int):
    """Gauss-Legendre nodes and weights on ``[0, 1]``."""
    x, w = leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def composite_gauss_legendre(edges, order: int):
    """Composite rule over consecutive intervals given by ``edges``.

    ``edges`` may carry leading batch dimensions, shape ``(..., k + 1)``;
    the result has shape ``(..., k * order)``.
    """
    edges = np.asarray(edges, dtype=float)
    s, w = gauss_legendre(order)
    a = edges[..., :-1, None]
    h = np.diff(edges, axis=-1)[..., None]
    nodes = a + h * s
    weights = h * w
    shape = edges.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def cosine_mapped_legendre(edges, order: int):
    """Composite rule with the map ``x = a + h (1 - cos(pi s)) / 2`` per panel.

    The map flattens square-root type endpoint behaviour, which appears
    wherever a panel edge is a tangency radius of a constraint circle.
    """
    edges = np.asarray(edges, dtype=float)
    s, w = gauss_legendre(order)
    g = 0.5 * (1.0 - np.cos(np.pi * s))
    dg = 0.5 * np.pi * np.sin(np.pi * s)
    a = edges[..., :-1, None]
    h = np.diff(edges, axis=-1)[..., None]
    nodes = a + h * g
    weights = h * w * dg
    shape = edges.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)
