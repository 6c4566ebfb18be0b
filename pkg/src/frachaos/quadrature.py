"""Quadrature grids and the endpoint-singular half-line integrator.

Weighted grids carry the Gaussian weight ``exp(-x**2 / (2 t))`` inside their
weights, so ``grid.integrate(f)`` approximates ``int f(x) exp(-x**2/(2t)) dx``
over the grid's domain. Panel grids carry plain Legendre weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import DomainError

HALF_LINE = "half_line_gaussian_weight"
FULL_LINE = "full_line_gaussian_weight"
FINITE_PANEL = "finite_panel"
GRID_KINDS = (HALF_LINE, FULL_LINE, FINITE_PANEL)


@lru_cache(maxsize=64)
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    return x, w


@lru_cache(maxsize=256)
def _jacobi(n: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    # weight (1 + x)**p on [-1, 1]
    x, w = roots_jacobi(n, 0.0, p)
    return x, w


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes and weights for one integration domain.

    ``t`` is the weight time scale; it is ``nan`` for finite panels.
    """

    kind: str
    n_nodes: int
    t: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.kind not in GRID_KINDS:
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("quadrature nodes must be strictly increasing")

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    @classmethod
    def half_line(cls, t: float, n_nodes: int = 200) -> "QuadratureGrid":
        """Gauss-Legendre on (0, 1) mapped by ``x = sqrt(t) s / (1 - s)``."""
        if t <= 0:
            raise DomainError(f"t must be positive, got {t}")
        s, w = _legendre(n_nodes)
        s = 0.5 * (s + 1.0)
        w = 0.5 * w
        scale = math.sqrt(t)
        x = scale * s / (1.0 - s)
        jac = scale / (1.0 - s) ** 2
        weights = w * jac * np.exp(-x * x / (2.0 * t))
        # far-tail nodes whose weight underflows carry no mass; drop them
        keep = weights > 0
        return cls(HALF_LINE, int(keep.sum()), float(t), x[keep], weights[keep])

    @classmethod
    def full_line(cls, t: float, n_nodes: int = 80) -> "QuadratureGrid":
        """Probabilists' Gauss-Hermite nodes scaled to variance ``t``."""
        if t <= 0:
            raise DomainError(f"t must be positive, got {t}")
        z, w = np.polynomial.hermite_e.hermegauss(n_nodes)
        scale = math.sqrt(t)
        return cls(FULL_LINE, n_nodes, float(t), scale * z, scale * w)

    @classmethod
    def panels(cls, lo: float, hi: float, n_panels: int, n_per: int = 32) -> "QuadratureGrid":
        """Composite Gauss-Legendre on ``[lo, hi]`` with equal panels."""
        if not hi > lo:
            raise DomainError(f"empty interval [{lo}, {hi}]")
        x, w = _legendre(n_per)
        edges = np.linspace(lo, hi, n_panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        return cls(FINITE_PANEL, nodes.size, math.nan, nodes, weights)


@dataclass(frozen=True)
class PanelRule:
    """Settings for integrals of the form ``int_0^U s**p f(s) ds``.

    The first panel ``[0, scale]`` uses a Gauss-Jacobi rule that absorbs
    ``s**p`` exactly; the rest is covered by Legendre panels of width ``scale``.
    """

    n_jacobi: int = 64
    n_legendre: int = 32
    max_panels: int = 400


DEFAULT_RULE = PanelRule()


def power_weight_nodes(
    p: float, upper: float, scale: float, rule: PanelRule = DEFAULT_RULE
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for ``int_0^upper s**p f(s) ds``, with ``p > -1``."""
    if p <= -1.0:
        raise DomainError(f"power {p} is not integrable at the origin")
    if not upper > 0:
        raise DomainError(f"upper limit must be positive, got {upper}")
    s0 = min(scale, upper)
    xj, wj = _jacobi(rule.n_jacobi, float(p))
    nodes = [0.5 * s0 * (xj + 1.0)]
    weights = [(0.5 * s0) ** (p + 1.0) * wj]
    if upper > s0:
        n_panels = min(rule.max_panels, max(1, math.ceil((upper - s0) / scale)))
        x, w = _legendre(rule.n_legendre)
        edges = np.linspace(s0, upper, n_panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        s = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        nodes.append(s)
        weights.append((half[:, None] * w[None, :]).ravel() * s**p)
    return np.concatenate(nodes), np.concatenate(weights)


def integrate_power(
    p: float,
    f: Callable[[np.ndarray], np.ndarray],
    upper: float,
    scale: float,
    rule: PanelRule = DEFAULT_RULE,
) -> float:
    """``int_0^upper s**p f(s) ds`` for a smooth vectorised ``f``."""
    s, w = power_weight_nodes(p, upper, scale, rule)
    return float(np.dot(w, f(s)))
