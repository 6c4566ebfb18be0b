"""The power-normalised parabolic cylinder function

    H_alpha(x, t) = t**(alpha/2) * exp(x**2 / (4 t)) * D_alpha(x / sqrt(t)).

At non-negative integer orders it is the scaled Hermite polynomial; as
``t -> 0`` it tends to ``x**alpha``. It solves the backward heat equation
``u_t + u_xx / 2 = 0`` and satisfies ``L u = -alpha u`` for ``L = t D^2 - x D``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .specfun import DEFAULT_CONFIG, SpecFunConfig, _as_output, _pcf_parts, hermite, pcf_D

# |alpha - round(alpha)| below this routes to the Hermite polynomial branch
INTEGER_WINDOW = 1e-9


@dataclass(frozen=True)
class PncfSpec:
    """An order ``alpha`` paired with a time ``t > 0``."""

    alpha: float
    t: float

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise DomainError(f"alpha must be finite, got {self.alpha}")
        if not (math.isfinite(self.t) and self.t > 0):
            raise DomainError(f"t must be positive, got {self.t}")

    def shifted(self, k: int) -> "PncfSpec":
        return PncfSpec(self.alpha - k, self.t)


def integer_order(alpha: float) -> int | None:
    """The non-negative integer ``alpha`` rounds to, or None off the window."""
    n = round(alpha)
    if n >= 0 and abs(alpha - n) < INTEGER_WINDOW:
        return int(n)
    return None


def log_H(spec: PncfSpec, x, cfg: SpecFunConfig = DEFAULT_CONFIG) -> tuple[np.ndarray, np.ndarray]:
    """``(sign, log|H_alpha(x, t)|)``, finite even where H overflows a float."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    n = integer_order(spec.alpha)
    if n is not None:
        h = np.atleast_1d(hermite(n, xa, spec.t))
        with np.errstate(divide="ignore"):
            return np.sign(h), np.log(np.abs(h))
    z = xa / math.sqrt(spec.t)
    mant, expo = _pcf_parts(spec.alpha, z, cfg)
    # exp(z^2/4) is paired with the exponent carried inside D
    with np.errstate(divide="ignore"):
        logmag = np.log(np.abs(mant)) + (expo + 0.25 * z * z) + 0.5 * spec.alpha * math.log(spec.t)
    return np.sign(mant), logmag


def eval_H(spec: PncfSpec, x, cfg: SpecFunConfig = DEFAULT_CONFIG):
    """H_alpha(x, t) for scalar or array ``x``.

    Raises OverflowError only when the value itself exceeds the float range,
    which can happen for ``x << 0`` at non-integer order.
    """
    n = integer_order(spec.alpha)
    if n is not None:
        return hermite(n, x, spec.t)
    sign, logmag = log_H(spec, x, cfg)
    if np.any(logmag > 709.78):
        raise OverflowError(f"H_{spec.alpha}(x, {spec.t}) exceeds the float range")
    return _as_output(sign * np.exp(logmag), x)


def eval_H_via_pcf(spec: PncfSpec, x):
    """The defining formula evaluated directly, bypassing the Hermite branch."""
    xa = np.asarray(x, dtype=float)
    z = xa / math.sqrt(spec.t)
    return spec.t ** (0.5 * spec.alpha) * np.exp(0.25 * z * z) * pcf_D(spec.alpha, z)


class Derivatives(NamedTuple):
    d_dx: float
    d_dt: float


def derivatives_H(spec: PncfSpec, x, cfg: SpecFunConfig = DEFAULT_CONFIG) -> Derivatives:
    """``dH/dx = alpha H_{alpha-1}`` and ``dH/dt = -alpha (alpha-1)/2 H_{alpha-2}``."""
    a = spec.alpha
    d_dx = 0.0 if a == 0 else a * eval_H(spec.shifted(1), x, cfg)
    c = 0.5 * a * (a - 1.0)
    d_dt = 0.0 if c == 0 else -c * eval_H(spec.shifted(2), x, cfg)
    if np.ndim(x) and np.ndim(d_dx) == 0:
        d_dx = np.full(np.shape(x), d_dx)
    if np.ndim(x) and np.ndim(d_dt) == 0:
        d_dt = np.full(np.shape(x), d_dt)
    return Derivatives(d_dx, d_dt)


def heat_residual(spec: PncfSpec, x, cfg: SpecFunConfig = DEFAULT_CONFIG):
    """``u_t + u_xx / 2`` with both terms taken from the order recurrences.

    Both terms are multiples of the same ``H_{alpha-2}``, so the residual
    only measures rounding; see :func:`heat_residual_fd` for an independent
    check of the evaluation kernel.
    """
    a = spec.alpha
    _, u_t = derivatives_H(spec, x, cfg)
    u_xx = 0.0 if a * (a - 1.0) == 0 else a * (a - 1.0) * eval_H(spec.shifted(2), x, cfg)
    return u_t + 0.5 * u_xx


def heat_residual_fd(spec: PncfSpec, x: float, rel_step: float = 1e-3) -> float:
    """``u_t + u_xx / 2`` by fourth-order central differences of eval_H.

    Returned relative to the scale ``1 + |u_xx|``.
    """
    t = spec.t
    hx = rel_step * math.sqrt(t)
    ht = rel_step * t

    def u(xx, tt):
        return eval_H(PncfSpec(spec.alpha, tt), xx)

    u_xx = (-u(x + 2 * hx, t) + 16 * u(x + hx, t) - 30 * u(x, t) + 16 * u(x - hx, t) - u(x - 2 * hx, t)) / (
        12 * hx * hx
    )
    u_t = (-u(x, t + 2 * ht) + 8 * u(x, t + ht) - 8 * u(x, t - ht) + u(x, t - 2 * ht)) / (12 * ht)
    return (u_t + 0.5 * u_xx) / (1.0 + abs(u_xx))


def ode_residual_D(alpha: float, t: float, x: float) -> float:
    """``t f'' + (1/2 - x^2/(4t)) f + alpha f`` for ``f(x) = D_alpha(x / sqrt(t))``.

    ``f''`` is the five-point fourth-order central difference with step
    ``1e-3 sqrt(t)``; its rounding floor is near ``1e-10 |f|``.
    """
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    s = math.sqrt(t)
    h = 1e-3 * s
    fm2, fm, f0, fp, fp2 = pcf_D(alpha, (x + h * np.arange(-2.0, 3.0)) / s)
    f2 = (-fm2 + 16.0 * fm - 30.0 * f0 + 16.0 * fp - fp2) / (12.0 * h * h)
    return t * f2 + (0.5 - x * x / (4.0 * t)) * f0 + alpha * f0


def eigen_residual(spec: PncfSpec, x, method: str = "recurrence", cfg: SpecFunConfig = DEFAULT_CONFIG):
    """``t u'' - x u' + alpha u`` for ``u = H_alpha(., t)``.

    ``method="recurrence"`` uses ``u' = alpha H_{alpha-1}`` and
    ``u'' = alpha (alpha-1) H_{alpha-2}``, which turns the residual into the
    three-term identity ``H_alpha = x H_{alpha-1} - (alpha-1) t H_{alpha-2}``.
    ``method="fd"`` differentiates eval_H numerically instead.
    """
    a, t = spec.alpha, spec.t
    u = eval_H(spec, x, cfg)
    if method == "recurrence":
        u1 = a * eval_H(spec.shifted(1), x, cfg)
        u2 = a * (a - 1.0) * eval_H(spec.shifted(2), x, cfg)
    elif method == "fd":
        h = 1e-3 * math.sqrt(t)
        xa = np.asarray(x, dtype=float)
        v = [eval_H(spec, xa + k * h, cfg) for k in (-2, -1, 1, 2)]
        u1 = (v[0] - 8 * v[1] + 8 * v[2] - v[3]) / (12 * h)
        u2 = (-v[0] + 16 * v[1] - 30 * u + 16 * v[2] - v[3]) / (12 * h * h)
    else:
        raise ValueError(f"unknown method {method!r}")
    return t * u2 - np.asarray(x) * u1 + a * u


class LiouvilleCheck(NamedTuple):
    lhs: float
    rhs: float


def liouville_rep_check(alpha: float, t: float, x: float) -> LiouvilleCheck:
    """Compare H_alpha with ``t^alpha e^{x^2/2t}`` times the right-sided
    Liouville derivative of the Gaussian ``e^{-y^2/(2t)}`` at ``x``."""
    from .fraccalc import FracOrder, KernelFn, fracderiv_minus

    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if abs(alpha - round(alpha)) < INTEGER_WINDOW:
        raise DomainError("integer orders reduce to Hermite polynomials; no fractional derivative involved")
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    lhs = float(eval_H(PncfSpec(alpha, t), x))
    order = FracOrder.of(alpha)
    deriv = fracderiv_minus(order, KernelFn.gaussian(t, n_derivs=order.m), x)
    rhs = t**alpha * math.exp(x * x / (2.0 * t)) * deriv
    return LiouvilleCheck(lhs, rhs)


def small_t_limit_error(alpha: float, x: float, t: float = 1e-6) -> float:
    """``|H_alpha(x, t) - x^alpha| / x^alpha`` for ``x > 0``."""
    if not x > 0:
        raise DomainError("the small-t limit x**alpha is only checked for x > 0")
    target = x**alpha
    return abs(float(eval_H(PncfSpec(alpha, t), x)) - target) / target
