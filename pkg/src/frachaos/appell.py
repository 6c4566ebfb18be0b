"""The Appell integral transform with respect to the Wiener process.

For the Wiener process the normaliser ``E exp(-u W_t)`` is ``exp(u^2 t/2)``,
so a regular kernel ``g`` is sent to

    A{g}(x) = int_0^inf g(u) exp(-u x - u^2 t / 2) du,

and the power ``y^alpha`` (through the inverse Laplace transform of its
kernel) is sent to ``H_alpha(x, t)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma

from .errors import DomainError, TruncationWarning
from .fraccalc import RIGHT, FracOrder, KernelFn, caputo, expgauss_kernel
from .quadrature import DEFAULT_RULE, PanelRule, integrate_power, power_weight_nodes
from .specfun import DEFAULT_CONFIG, _pcf_parts

POWER_NEGATIVE = "power_negative"
POWER_INTEGER = "power_integer"
POWER_POSITIVE_NONINTEGER = "power_positive_noninteger"


@dataclass(frozen=True)
class AppellKernel:
    """Which inverse-Laplace object stands behind ``y^alpha``.

    * ``power_negative``: ``u^(beta-1) / Gamma(beta)`` with ``beta = -alpha``;
    * ``power_integer``: the n-th derivative of the delta at 0;
    * ``power_positive_noninteger``: the Caputo derivative of the delta.
    """

    kind: str
    order: float

    def __post_init__(self):
        if self.kind == POWER_NEGATIVE and not self.order > 0:
            raise DomainError("beta must be positive")
        elif self.kind == POWER_INTEGER and not (self.order >= 0 and float(self.order).is_integer()):
            raise DomainError("n must be a non-negative integer")
        elif self.kind == POWER_POSITIVE_NONINTEGER and not (self.order > 0 and not float(self.order).is_integer()):
            raise DomainError("alpha must be positive and non-integer")
        elif self.kind not in (POWER_NEGATIVE, POWER_INTEGER, POWER_POSITIVE_NONINTEGER):
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    @classmethod
    def for_power(cls, alpha: float) -> "AppellKernel":
        alpha = float(alpha)
        if alpha < 0:
            return cls(POWER_NEGATIVE, -alpha)
        if alpha.is_integer():
            return cls(POWER_INTEGER, alpha)
        return cls(POWER_POSITIVE_NONINTEGER, alpha)


def _gauss_reach(x: float, t: float) -> float:
    # exp(-u x - u^2 t/2) peaks at u = -x/t and has width 1/sqrt(t)
    return max(0.0, -x / t) + 12.0 * math.sqrt(2.0 / t)


def appell_wiener_generic(g: KernelFn, x: float, t: float, rule: PanelRule = DEFAULT_RULE) -> float:
    """``int_0^inf g(u) exp(-u x - u^2 t/2) du`` for a regular decaying kernel."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    reaches = [_gauss_reach(x, t), max(0.0, g.center) + g.reach()]
    if x > 0:
        reaches.append(70.0 / x)
    upper = min(reaches)
    scale = min(g.width(), 1.0 / math.sqrt(t), 1.0 / abs(x) if x else math.inf)
    scale = max(scale, upper / rule.max_panels)
    u, w = power_weight_nodes(0.0, upper, scale, rule)
    integrand = lambda v: np.asarray(g.f(v)) * np.exp(-v * x - 0.5 * t * v * v)  # noqa: E731
    val = float(np.dot(w, integrand(u)))
    tail = abs(float(integrand(np.array([upper]))[0])) * scale
    if tail > 1e-12 * max(abs(val), 1e-300) and tail > 1e-300:
        warnings.warn(f"truncated tail may reach {tail:.3e}", TruncationWarning, stacklevel=2)
    return val


def _integer_branch(n: int, x: float, t: float) -> float:
    # exp(-u x - u^2 t/2) = sum_k c_k u^k with (k+1) c_{k+1} = -x c_k - t c_{k-1}
    c_prev, c = 0.0, 1.0
    for k in range(n):
        c_prev, c = c, (-x * c - t * c_prev) / (k + 1)
    return (-1) ** n * math.factorial(n) * c


def appell_power(alpha: float, x: float, t: float, rule: PanelRule = DEFAULT_RULE) -> float:
    """The transform of ``y^alpha``, branch by branch.

    * ``alpha < 0``: ``1/Gamma(-alpha) int_0^inf u^(-alpha-1) exp(-u x - u^2 t/2) du``;
    * ``alpha = n``: ``(-1)^n`` times the n-th u-derivative of
      ``exp(-u x - u^2 t/2)`` at 0, from its Taylor recurrence;
    * otherwise: the right-sided Caputo derivative of that exponential at 0,
      ``1/Gamma(m-alpha) int_0^inf u^(m-alpha-1) H_m(x + t u, t) exp(...) du``,
      by quadrature.

    Each branch equals ``H_alpha(x, t)``.
    """
    kernel = AppellKernel.for_power(alpha)
    x, t = float(x), float(t)
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if kernel.kind == POWER_INTEGER:
        return _integer_branch(int(kernel.order), x, t)
    if kernel.kind == POWER_NEGATIVE:
        beta = kernel.order
        upper = _gauss_reach(x, t)
        scale = min(1.0 / math.sqrt(t), 1.0 / abs(x) if x else math.inf)
        scale = max(scale, upper / rule.max_panels)
        val = integrate_power(beta - 1.0, lambda u: np.exp(-u * x - 0.5 * t * u * u), upper, scale, rule)
        return val / float(_gamma(beta))
    order = FracOrder.of(kernel.order)
    return caputo(RIGHT, order, expgauss_kernel(x, t, n_derivs=order.m), 0.0, rule)


def appell_power_closed(alpha: float, x: float, t: float) -> float:
    """Positive non-integer branch through the closed-form chain.

    ``(-1)^m d^m/dxi^m`` of ``t^{-b/2} e^{x^2/2t} e^{-z^2/4} U(b - 1/2, z)``,
    ``z = (x + t xi)/sqrt(t)``, ``b = m - alpha``, at ``xi = 0``. Each
    derivative lowers the first parameter of U by one and brings out
    ``-sqrt(t)``, leaving ``t^{alpha/2} e^{x^2/2t} e^{-z^2/4} U(-alpha - 1/2, z)``.
    """
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    m = FracOrder.of(alpha).m
    beta = m - alpha
    a = beta - 0.5 - m
    z = x / math.sqrt(t)
    log_pref = (m - beta) / 2 * math.log(t) + x * x / (2 * t) - 0.25 * z * z
    mant, expo = _pcf_parts(-a - 0.5, np.array([z]), DEFAULT_CONFIG)
    return float(mant[0] * math.exp(expo[0] + log_pref))


def mgf_bivariate(u: float, v: float, params) -> float:
    """``E exp(u W_t + v W_s) = exp((u^2 t + 2 u v rho sqrt(t s) + v^2 s)/2)``."""
    s, t, rho = params.s, params.t, params.rho
    return math.exp(0.5 * (u * u * t + 2.0 * u * v * rho * math.sqrt(t * s) + v * v * s))
