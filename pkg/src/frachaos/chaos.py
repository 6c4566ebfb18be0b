"""Wiener chaos expansions of a function of one Wiener increment.

The polynomial expansion uses Hermite polynomials against the N(0, t)
density on the whole line. The fractional expansion projects onto an
orthogonal set of H_alpha under the half-line weight exp(-x^2/(2t)); its
accuracy claims therefore only cover x > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, GridMismatch, NotOrthogonal
from .ortho import AlphaSet, weighted_inner
from .pncf import PncfSpec, eval_H
from .quadrature import FULL_LINE, HALF_LINE, QuadratureGrid
from .specfun import hermite

FRACTIONAL = "fractional"
POLYNOMIAL = "polynomial"

Fn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class IntervalIncrement:
    """A realised increment ``W(t) - W(s)`` and the interval length ``t - s``."""

    value: float
    measure: float

    def __post_init__(self):
        if not self.measure > 0:
            raise DomainError(f"interval measure must be positive, got {self.measure}")


@dataclass(frozen=True, eq=False)
class ChaosExpansion:
    t: float
    basis_kind: str
    coefficients: np.ndarray
    alpha_set: AlphaSet | None = None
    max_degree: int | None = None
    residual: float = field(default=math.nan)

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError(f"t must be positive, got {self.t}")
        if self.basis_kind == FRACTIONAL:
            if self.alpha_set is None or len(self.alpha_set) != len(self.coefficients):
                raise ValueError("fractional expansion needs one coefficient per order")
        elif self.basis_kind == POLYNOMIAL:
            if self.max_degree is None or self.max_degree + 1 != len(self.coefficients):
                raise ValueError("polynomial expansion needs max_degree + 1 coefficients")
        else:
            raise ValueError(f"unknown basis kind {self.basis_kind!r}")

    def basis(self, x, t: float | None = None) -> list[np.ndarray]:
        t = self.t if t is None else t
        if self.basis_kind == FRACTIONAL:
            return [np.asarray(eval_H(PncfSpec(a, t), x)) for a in self.alpha_set.alphas]
        return [np.asarray(hermite(k, x, t)) for k in range(self.max_degree + 1)]

    def __call__(self, x, t: float | None = None):
        terms = self.basis(np.asarray(x, dtype=float), t)
        return sum(c * b for c, b in zip(self.coefficients, terms))


def gram_matrix(alpha_set: AlphaSet, t: float, grid: QuadratureGrid | None = None) -> np.ndarray:
    grid = QuadratureGrid.half_line(t) if grid is None else grid
    fs = [lambda x, a=a: eval_H(PncfSpec(a, t), x) for a in alpha_set.alphas]
    n = len(fs)
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = g[j, i] = weighted_inner(fs[i], fs[j], t, grid)
    return g


def expand_fractional(
    g: Fn, alpha_set: AlphaSet, t: float, grid: QuadratureGrid | None = None, ortho_tol: float = 1e-7
) -> ChaosExpansion:
    """Coefficients ``c_k = <g, H_k> / <H_k, H_k>`` on the half-line.

    The denominator is the squared norm; the orders are first checked to be
    orthogonal at this ``t`` to within ``ortho_tol`` of the norms.
    """
    grid = QuadratureGrid.half_line(t) if grid is None else grid
    gram = gram_matrix(alpha_set, t, grid)
    d = np.sqrt(np.diag(gram))
    normalised = gram / np.outer(d, d)
    off = normalised - np.eye(len(d))
    if np.any(np.abs(off) > ortho_tol):
        raise NotOrthogonal(f"normalised Gram off-diagonal reaches {np.max(np.abs(off)):.3e}")
    coeffs = np.array(
        [weighted_inner(g, lambda x, a=a: eval_H(PncfSpec(a, t), x), t, grid) for a in alpha_set.alphas]
    ) / np.diag(gram)
    exp = ChaosExpansion(t, FRACTIONAL, coeffs, alpha_set=alpha_set)
    return _with_residual(exp, g, grid)


def expand_polynomial(g: Fn, max_degree: int, t: float, grid: QuadratureGrid | None = None) -> ChaosExpansion:
    """``a_k = E[g(W_t) H_k(W_t, t)] / (k! t^k)`` by Gauss-Hermite quadrature."""
    if max_degree < 0:
        raise DomainError("max_degree must be non-negative")
    grid = QuadratureGrid.full_line(t, n_nodes=max(80, 2 * max_degree + 2)) if grid is None else grid
    if grid.kind != FULL_LINE or not math.isclose(grid.t, t, rel_tol=1e-14):
        raise GridMismatch(f"need a {FULL_LINE} grid at t={t}")
    w = grid.weights / math.sqrt(2 * math.pi * t)
    gy = np.asarray(g(grid.nodes), dtype=float)
    coeffs = np.array(
        [np.dot(w, gy * hermite(k, grid.nodes, t)) / (math.factorial(k) * t**k) for k in range(max_degree + 1)]
    )
    exp = ChaosExpansion(t, POLYNOMIAL, coeffs, max_degree=max_degree)
    return _with_residual(exp, g, grid)


def reconstruct(exp: ChaosExpansion, inc: IntervalIncrement) -> float:
    """The expansion evaluated at ``H_k(W(I), m(I))``."""
    return float(exp(inc.value, inc.measure))


def residual_norm(g: Fn, exp: ChaosExpansion, grid: QuadratureGrid | None = None) -> float:
    """Weighted L2 distance between ``g`` and the expansion.

    Half-line weight ``exp(-x^2/2t)`` for fractional expansions; the N(0, t)
    density for polynomial ones.
    """
    if exp.basis_kind == FRACTIONAL:
        grid = QuadratureGrid.half_line(exp.t) if grid is None else grid
        if grid.kind != HALF_LINE:
            raise GridMismatch("fractional residuals use the half-line grid")
        w = grid.weights
    else:
        grid = QuadratureGrid.full_line(exp.t, n_nodes=max(80, 2 * exp.max_degree + 2)) if grid is None else grid
        if grid.kind != FULL_LINE:
            raise GridMismatch("polynomial residuals use the full-line grid")
        w = grid.weights / math.sqrt(2 * math.pi * exp.t)
    if not math.isclose(grid.t, exp.t, rel_tol=1e-14):
        raise GridMismatch(f"grid built for t={grid.t}, expansion at t={exp.t}")
    diff = np.asarray(g(grid.nodes), dtype=float) - exp(grid.nodes)
    return math.sqrt(max(0.0, float(np.dot(w, diff * diff))))


def _with_residual(exp: ChaosExpansion, g: Fn, grid: QuadratureGrid) -> ChaosExpansion:
    r = residual_norm(g, exp, grid)
    return ChaosExpansion(exp.t, exp.basis_kind, exp.coefficients, exp.alpha_set, exp.max_degree, r)

