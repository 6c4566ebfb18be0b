"""Liouville and Caputo fractional integrals and derivatives.

Right-sided operators act towards ``+inf``::

    (I^b_- f)(x) = 1/Gamma(b) * int_x^inf (y - x)**(b-1) f(y) dy

and the left-sided ones on ``(0, x)``. After the substitution ``y = x + s``
the weight ``s**(b-1)`` is absorbed by a Gauss-Jacobi panel at the endpoint,
and the remaining range is covered by Gauss-Legendre panels.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gamma as _gamma

from .errors import AccuracyWarning, DomainError, MissingDerivative, TruncationWarning
from .quadrature import DEFAULT_RULE, PanelRule, power_weight_nodes
from .specfun import DEFAULT_CONFIG, _pcf_parts, hermite

GAUSSIAN = "gaussian"
EXPONENTIAL = "exponential"

Fn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FracOrder:
    """A positive order with its ceiling integer ``m``."""

    order: float
    m: int

    def __post_init__(self):
        if not self.order > 0:
            raise DomainError(f"fractional order must be positive, got {self.order}")
        expected = int(self.order) if self.is_integer else math.floor(self.order) + 1
        if self.m != expected:
            raise ValueError(f"m={self.m} inconsistent with order {self.order}")

    @property
    def is_integer(self) -> bool:
        return float(self.order).is_integer()

    @classmethod
    def of(cls, order: float) -> "FracOrder":
        order = float(order)
        m = int(order) if order.is_integer() else math.floor(order) + 1
        return cls(order, m)


@dataclass(frozen=True)
class KernelFn:
    """A smooth decaying integrand with optional derivatives.

    ``derivs[k-1]`` is the k-th derivative. ``decay_rate`` is ``a`` in the
    bound ``|f(y)| <= C exp(-a (y - center)**2)`` (Gaussian decay) or
    ``C exp(-a (y - center))`` (exponential decay) as ``y -> inf``.
    """

    f: Fn
    derivs: tuple[Fn, ...] = ()
    decay_rate: float = 0.5
    decay: str = GAUSSIAN
    center: float = 0.0
    scale: float | None = field(default=None)

    def __post_init__(self):
        if not self.decay_rate > 0:
            raise DomainError(f"decay_rate must be positive, got {self.decay_rate}")
        if self.decay not in (GAUSSIAN, EXPONENTIAL):
            raise ValueError(f"unknown decay kind {self.decay!r}")

    def __call__(self, y):
        return self.f(y)

    def derivative(self, k: int) -> Fn:
        if k == 0:
            return self.f
        if len(self.derivs) < k:
            raise MissingDerivative(f"kernel supplies {len(self.derivs)} derivatives, order {k} needed")
        return self.derivs[k - 1]

    def width(self) -> float:
        """Length scale on which the kernel varies."""
        if self.scale is not None:
            return self.scale
        if self.decay == GAUSSIAN:
            return 1.0 / math.sqrt(2.0 * self.decay_rate)
        return 1.0 / self.decay_rate

    def reach(self) -> float:
        """Distance past ``center`` beyond which the kernel is below ~1e-30."""
        if self.decay == GAUSSIAN:
            return 12.0 / math.sqrt(self.decay_rate)
        return 70.0 / self.decay_rate

    @classmethod
    def gaussian(cls, t: float, n_derivs: int = 4) -> "KernelFn":
        """``exp(-y^2/(2t))`` with derivatives ``(-1/t)^k H_k(y, t) exp(-y^2/(2t))``."""
        if not t > 0:
            raise DomainError(f"t must be positive, got {t}")

        def make(k):
            c = (-1.0 / t) ** k
            return lambda y: c * hermite(k, np.asarray(y, dtype=float), t) * np.exp(-np.square(y) / (2.0 * t))

        return cls(
            f=make(0),
            derivs=tuple(make(k) for k in range(1, n_derivs + 1)),
            decay_rate=1.0 / (2.0 * t),
        )

    @classmethod
    def exponential(cls, rate: float = 1.0, n_derivs: int = 4) -> "KernelFn":
        """``exp(-rate y)`` on the half-line it is used on."""

        def make(k):
            c = (-rate) ** k
            return lambda y: c * np.exp(-rate * np.asarray(y, dtype=float))

        return cls(f=make(0), derivs=tuple(make(k) for k in range(1, n_derivs + 1)), decay_rate=rate, decay=EXPONENTIAL)


def _upper_limit(f: KernelFn, x: float) -> float:
    return max(0.0, f.center - x) + f.reach()


def _check_tail(f: Fn, at: float, width: float, value: float) -> None:
    bound = abs(float(np.asarray(f(np.array([at])))[0])) * width
    if bound > 1e-12 * max(abs(value), 1e-300) and bound > 1e-300:
        warnings.warn(
            f"truncated tail may reach {bound:.3e} against a value of {value:.3e}",
            TruncationWarning,
            stacklevel=3,
        )


def _right_integral(beta: float, g: Fn, kernel: KernelFn, x: float, rule: PanelRule) -> float:
    """(1/Gamma(beta)) int_0^U s**(beta-1) g(x + s) ds."""
    upper = _upper_limit(kernel, x)
    scale = kernel.width()
    # a Gaussian centred left of x narrows by the slope it presents at x
    if kernel.decay == GAUSSIAN and x > kernel.center:
        scale = min(scale, 1.0 / (2.0 * kernel.decay_rate * (x - kernel.center)))
    scale = max(scale, upper / rule.max_panels)
    s, w = power_weight_nodes(beta - 1.0, upper, scale, rule)
    val = float(np.dot(w, g(x + s))) / float(_gamma(beta))
    _check_tail(g, x + upper, scale, val)
    return val


def fracint_minus(beta: FracOrder, f: KernelFn, x: float, rule: PanelRule = DEFAULT_RULE) -> float:
    """Right-sided Liouville integral ``(I^beta_- f)(x)``."""
    return _right_integral(beta.order, f.f, f, float(x), rule)


def fracint_0plus(beta: FracOrder, f: KernelFn | Fn, x: float, rule: PanelRule = DEFAULT_RULE) -> float:
    """Left-sided integral ``1/Gamma(b) int_0^x (x - y)**(b-1) f(y) dy``."""
    x = float(x)
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    g = f.f if isinstance(f, KernelFn) else f
    scale = x / max(1, math.ceil(x))
    s, w = power_weight_nodes(beta.order - 1.0, x, scale, rule)
    return float(np.dot(w, g(x - s))) / float(_gamma(beta.order))


def _fd_weights(m: int, half_width: int) -> np.ndarray:
    # central stencil on offsets -p..p for the m-th derivative
    offsets = np.arange(-half_width, half_width + 1, dtype=float)
    vander = np.vander(offsets, increasing=True).T
    rhs = np.zeros(offsets.size)
    rhs[m] = math.factorial(m)
    return np.linalg.solve(vander, rhs)


def _fd_derivative(fn: Callable[[float], float], x: float, m: int, h: float) -> float:
    p = m // 2 + 2
    w = _fd_weights(m, p)
    vals = np.array([fn(x + k * h) for k in range(-p, p + 1)])
    return float(np.dot(w, vals)) / h**m


def fracderiv_minus(alpha: FracOrder, f: KernelFn, x: float, rule: PanelRule = DEFAULT_RULE) -> float:
    """Right-sided Liouville derivative ``(-1)^m d^m/dx^m (I^{m-alpha}_- f)(x)``.

    With ``f.derivs`` available the derivative moves under the integral:
    ``(-1)^m I^{m-alpha}_- f^(m)``. Otherwise the inner integral is
    differentiated by central differences and an AccuracyWarning is raised
    when the step-halving error estimate exceeds 1e-5.
    """
    m = alpha.m
    sign = -1.0 if m % 2 else 1.0
    x = float(x)
    if alpha.is_integer:
        if len(f.derivs) >= m:
            return sign * float(np.asarray(f.derivative(m)(np.array([x])))[0])
        inner = lambda y: float(np.asarray(f.f(np.array([y])))[0])  # noqa: E731
    else:
        if len(f.derivs) >= m:
            return sign * _right_integral(m - alpha.order, f.derivative(m), f, x, rule)
        inner = lambda y: _right_integral(m - alpha.order, f.f, f, y, rule)  # noqa: E731
    h = 1e-2 * f.width()
    fine = _fd_derivative(inner, x, m, h)
    coarse = _fd_derivative(inner, x, m, 2 * h)
    err = abs(fine - coarse)
    if err > 1e-5 * max(1.0, abs(fine)):
        warnings.warn(f"finite-difference derivative error estimate {err:.2e}", AccuracyWarning, stacklevel=2)
    return sign * fine


LEFT = "left_0plus"
RIGHT = "right_minus"


def caputo(side: str, alpha: FracOrder, f: KernelFn, x: float, rule: PanelRule = DEFAULT_RULE) -> float:
    """Caputo derivative, left-sided on ``(0, x)`` or right-sided towards ``+inf``."""
    m = alpha.m
    dm = f.derivative(m)
    x = float(x)
    if side == LEFT:
        if not x > 0:
            raise DomainError(f"x must be positive, got {x}")
        if alpha.is_integer:
            return float(np.asarray(dm(np.array([x])))[0])
        return fracint_0plus(FracOrder.of(m - alpha.order), dm, x, rule)
    if side == RIGHT:
        sign = -1.0 if m % 2 else 1.0
        if alpha.is_integer:
            return sign * float(np.asarray(dm(np.array([x])))[0])
        return sign * _right_integral(m - alpha.order, dm, f, x, rule)
    raise ValueError(f"side must be {LEFT!r} or {RIGHT!r}, got {side!r}")


def fracint_kernel(beta: FracOrder, f: KernelFn, rule: PanelRule = DEFAULT_RULE) -> KernelFn:
    """``I^beta_- f`` as a kernel, so the operators compose.

    Derivatives of f carry over since differentiation commutes with I_-.
    """

    def lift(g: Fn) -> Fn:
        def h(y):
            ys = np.atleast_1d(np.asarray(y, dtype=float))
            out = np.array([_right_integral(beta.order, g, f, float(v), rule) for v in ys])
            return out if np.ndim(y) else out[0]

        return h

    return KernelFn(
        f=lift(f.f),
        derivs=tuple(lift(d) for d in f.derivs),
        decay_rate=f.decay_rate,
        decay=f.decay,
        center=f.center,
        scale=f.scale,
    )


# --------------------------------------------------------------------------
# Closed forms for Gaussian kernels
# --------------------------------------------------------------------------


def _scaled_U(beta: float, z: float, log_prefactor: float) -> float:
    """``exp(log_prefactor) * U(beta - 1/2, z)`` without intermediate overflow."""
    mant, expo = _pcf_parts(-beta, np.array([z], dtype=float), DEFAULT_CONFIG)
    return float(mant[0] * math.exp(expo[0] + log_prefactor))


def gaussian_fracint_closed(beta: float, t: float, xi: float) -> float:
    """``(I^beta_- exp(-y^2/2t))(xi) = t^{beta/2} e^{-xi^2/4t} U(beta - 1/2, xi/sqrt(t))``."""
    if not beta > 0 or not t > 0:
        raise DomainError("beta and t must be positive")
    return _scaled_U(beta, xi / math.sqrt(t), 0.5 * beta * math.log(t) - xi * xi / (4.0 * t))


def expgauss_fracint_closed(beta: float, t: float, x: float, xi: float) -> float:
    """``(I^beta_- exp(-x y - t y^2/2))(xi)`` in closed form::

        t^{-beta/2} e^{x^2/2t - (x + t xi)^2/4t} U(beta - 1/2, (x + t xi)/sqrt(t))
    """
    if not beta > 0 or not t > 0:
        raise DomainError("beta and t must be positive")
    w = x + t * xi
    return _scaled_U(beta, w / math.sqrt(t), -0.5 * beta * math.log(t) + x * x / (2.0 * t) - w * w / (4.0 * t))


def expgauss_kernel(x: float, t: float, n_derivs: int = 0) -> KernelFn:
    """``F(y) = exp(-x y - t y^2 / 2)`` with ``F^(k)(y) = (-1)^k H_k(x + t y, t) F(y)``."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")

    def make(k):
        c = (-1.0) ** k
        return lambda y: c * hermite(k, x + t * np.asarray(y, dtype=float), t) * np.exp(
            -x * np.asarray(y, dtype=float) - 0.5 * t * np.square(y)
        )

    return KernelFn(
        f=make(0),
        derivs=tuple(make(k) for k in range(1, n_derivs + 1)),
        decay_rate=0.5 * t,
        center=-x / t,
    )

