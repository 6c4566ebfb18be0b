"""Half-line orthogonality of H_alpha under the weight exp(-x^2 / (2t)).

Two orders are orthogonal on (0, inf) when

    A(a_k, a_m) = Gamma(-a_m/2) Gamma((1-a_k)/2) - Gamma(-a_k/2) Gamma((1-a_m)/2)

vanishes. On the conjugate family ``a_m = 1 - a_k`` this reduces to a
csc/sec expression whose non-trivial roots give orthogonal pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma as _gamma

from .errors import GridMismatch, NotOrthogonal, PoleError
from .pncf import PncfSpec, eval_H, integer_order
from .quadrature import HALF_LINE, QuadratureGrid
from .specfun import digamma

Fn = Callable[[np.ndarray], np.ndarray]


def _is_natural(alpha: float) -> bool:
    # zero counts here: Gamma(-alpha/2) has a pole there too
    return integer_order(alpha) is not None


def _check_grid(grid: QuadratureGrid, t: float) -> None:
    if grid.kind != HALF_LINE:
        raise GridMismatch(f"expected a {HALF_LINE} grid, got {grid.kind}")
    if not math.isclose(grid.t, t, rel_tol=1e-14):
        raise GridMismatch(f"grid built for t={grid.t}, used with t={t}")


def weighted_inner(f: Fn, g: Fn, t: float, grid: QuadratureGrid | None = None) -> float:
    """``int_0^inf f(x) g(x) exp(-x^2/(2t)) dx``."""
    grid = QuadratureGrid.half_line(t) if grid is None else grid
    _check_grid(grid, t)
    x = grid.nodes
    return float(np.dot(grid.weights, np.asarray(f(x)) * np.asarray(g(x))))


def a_fn(alpha_k: float, alpha_m: float) -> float:
    for a in (alpha_k, alpha_m):
        if _is_natural(a):
            raise PoleError(f"A is undefined at the natural order {a}")
    g = _gamma
    return float(g(-alpha_m / 2) * g((1 - alpha_k) / 2) - g(-alpha_k / 2) * g((1 - alpha_m) / 2))


def a_conjugate(alpha: float) -> float:
    """``A(alpha, 1 - alpha) = 2 pi (1/(alpha sin(pi alpha/2)) + 1/((alpha-1) cos(pi alpha/2)))``."""
    alpha = float(alpha)
    if alpha == round(alpha):
        raise PoleError(f"A(alpha, 1-alpha) has a pole at the integer {alpha}")
    h = 0.5 * math.pi * alpha
    return 2.0 * math.pi * (1.0 / (alpha * math.sin(h)) + 1.0 / ((alpha - 1.0) * math.cos(h)))


def find_conjugate_roots(
    lo: float,
    hi: float,
    grid_step: float = 0.01,
    tol: float = 1e-10,
    exclude_symmetric: bool = False,
    integer_margin: float = 1e-3,
) -> list[float]:
    """Roots of :func:`a_conjugate` in ``(lo, hi)``.

    A sign scan on ``grid_step`` skips points within ``integer_margin`` of an
    integer and never brackets across one, since the poles there flip the sign
    too. Each bracket is refined with Brent's method; a candidate is kept
    only if ``|a_conjugate| <= tol`` relative to the scale ``2 pi``.
    """
    if not hi > lo:
        return []
    n = max(2, int(math.ceil((hi - lo) / grid_step)) + 1)
    pts = [p for p in np.linspace(lo, hi, n) if abs(p - round(p)) > integer_margin]
    roots: list[float] = []
    for a, b in zip(pts[:-1], pts[1:]):
        if math.floor(a) != math.floor(b) or (b == math.floor(b)):
            continue
        fa, fb = a_conjugate(a), a_conjugate(b)
        if fa == 0.0:
            cand = a
        elif fa * fb > 0:
            continue
        else:
            cand = brentq(a_conjugate, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        if abs(a_conjugate(cand)) > tol:
            continue
        if exclude_symmetric and abs(cand - 0.5) < 1e-9:
            continue
        if not roots or abs(cand - roots[-1]) > 1e-9:
            roots.append(float(cand))
    if pts and a_conjugate(pts[-1]) == 0.0 and (not roots or abs(pts[-1] - roots[-1]) > 1e-9):
        roots.append(float(pts[-1]))
    return roots


@dataclass(frozen=True, eq=False)
class AlphaSet:
    """Orders with ``|A(a_k, a_m)| <= tol`` for every pair."""

    alphas: tuple[float, ...]
    t: float
    pairwise_A: np.ndarray = field(repr=False)
    tol: float = 1e-8

    def __post_init__(self):
        for a in self.alphas:
            if _is_natural(a):
                raise NotOrthogonal(f"order {a} is a natural number")
        off = ~np.eye(len(self.alphas), dtype=bool)
        if np.any(np.abs(self.pairwise_A[off]) > self.tol):
            worst = float(np.max(np.abs(self.pairwise_A[off])))
            raise NotOrthogonal(f"pairwise A reaches {worst:.3e} > tol {self.tol:.1e}")

    @classmethod
    def build(cls, alphas: Sequence[float], t: float, tol: float = 1e-8) -> "AlphaSet":
        alphas = tuple(float(a) for a in alphas)
        n = len(alphas)
        mat = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if i != j:
                    mat[i, j] = a_fn(alphas[i], alphas[j])
        return cls(alphas, float(t), mat, tol)

    @classmethod
    def conjugate_pair(cls, root: float, t: float, tol: float = 1e-8) -> "AlphaSet":
        return cls.build((root, 1.0 - root), t, tol)

    def __len__(self) -> int:
        return len(self.alphas)


def greedy_alpha_set(candidates: Sequence[float], t: float, tol: float = 1e-8) -> AlphaSet:
    """Greedy selection of mutually A-orthogonal candidates, in the given order.

    Each candidate joins when ``|A|`` against every member already chosen is
    within ``tol``.
    """
    chosen: list[float] = []
    for c in candidates:
        if _is_natural(c) or any(abs(c - a) < 1e-12 for a in chosen):
            continue
        if all(abs(a_fn(a, c)) <= tol for a in chosen):
            chosen.append(float(c))
    return AlphaSet.build(chosen, t, tol)


# --------------------------------------------------------------------------
# Norms and the closed-form audit
# --------------------------------------------------------------------------


def _pair_integral(alpha_k: float, alpha_m: float, t: float, grid: QuadratureGrid) -> float:
    fk = lambda x: eval_H(PncfSpec(alpha_k, t), x)  # noqa: E731
    fm = lambda x: eval_H(PncfSpec(alpha_m, t), x)  # noqa: E731
    return weighted_inner(fk, fm, t, grid)


def norm_closed_form(alpha: float, t: float, t_power: float) -> float:
    """``t^p sqrt(pi) (psi((1-a)/2) - psi(-a/2)) / (2 sqrt(2) Gamma(-a))``."""
    c = math.sqrt(math.pi) * (digamma((1 - alpha) / 2) - digamma(-alpha / 2)) / (2 * math.sqrt(2) * _gamma(-alpha))
    return t**t_power * float(c)


class NormReport(NamedTuple):
    alpha: float
    t: float
    quadrature: float
    printed_closed_form: float  # carries the factor t^(1 + alpha)
    audited_closed_form: float  # carries the factor t^(alpha + 1/2)


def norm_sq_report(alpha: float, t: float, grid: QuadratureGrid | None = None) -> NormReport:
    """Diagonal norm by quadrature next to both closed-form candidates.

    At natural orders the classical value ``n! t^n sqrt(2 pi t) / 2`` stands
    in for both closed forms.
    """
    grid = QuadratureGrid.half_line(t) if grid is None else grid
    _check_grid(grid, t)
    n = integer_order(alpha)
    q = _pair_integral(alpha, alpha, t, grid)
    if n is not None:
        exact = 0.5 * math.factorial(n) * t**n * math.sqrt(2 * math.pi * t)
        return NormReport(alpha, t, q, exact, exact)
    return NormReport(alpha, t, q, norm_closed_form(alpha, t, 1 + alpha), norm_closed_form(alpha, t, alpha + 0.5))


def norm_sq_H(alpha: float, t: float, grid: QuadratureGrid | None = None) -> float:
    """``int_0^inf H_alpha(x, t)^2 exp(-x^2/(2t)) dx`` by quadrature."""
    return norm_sq_report(alpha, t, grid).quadrature


class L01Check(NamedTuple):
    lhs: float
    rhs: float


def cross_check_l01(alpha_k: float, alpha_m: float, t: float, grid: QuadratureGrid | None = None) -> L01Check:
    """``int_0^inf D_{a_k}(x/sqrt t) D_{a_m}(x/sqrt t) dx`` against the closed form.

    The closed form is returned with the factor ``t`` it is usually printed
    with; the quadrature side scales as ``sqrt(t)`` (see :func:`t_exponent`).
    """
    if _is_natural(alpha_k) or _is_natural(alpha_m):
        raise PoleError("the closed form has Gamma poles at natural orders")
    if alpha_k == alpha_m:
        raise ValueError("orders must differ")
    grid = QuadratureGrid.half_line(t) if grid is None else grid
    # D_a(x/sqrt t) = t^{-a/2} exp(-x^2/(4t)) H_a(x, t)
    lhs = t ** (-(alpha_k + alpha_m) / 2) * _pair_integral(alpha_k, alpha_m, t, grid)
    rhs = t * l01_closed_form_unit(alpha_k, alpha_m)
    return L01Check(lhs, rhs)


def l01_closed_form_unit(alpha_k: float, alpha_m: float) -> float:
    """The closed form without its power of ``t`` (its value at t = 1)."""
    denom = (alpha_m - alpha_k) * 2 ** ((3 + alpha_k + alpha_m) / 2) * _gamma(-alpha_k) * _gamma(-alpha_m)
    return a_fn(alpha_k, alpha_m) / float(denom)


def t_exponent(fn: Callable[[float], float], t: float, factor: float = 4.0) -> float:
    """Measured ``p`` in ``fn(t) ~ t^p`` from ``fn(factor t) / fn(t)``."""
    return math.log(fn(factor * t) / fn(t)) / math.log(factor)
