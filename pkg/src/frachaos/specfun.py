"""Scalar special-function kernels of real order and argument.

Parabolic cylinder functions are evaluated in three regimes of ``z``:

* a Kummer-series representation for moderate ``|z|``;
* a backward Taylor integration of Weber's equation on
  ``[series_switch_z, asym_switch_z)``, where the two series terms cancel
  catastrophically but the recessive solution is stable when integrated
  towards the origin;
* Poincare asymptotic expansions for ``z >= asym_switch_z`` and for
  ``z <= -neg_asym_switch_z`` (via the connection formula).

Internally every value is carried as ``mantissa * exp(exponent)`` so that
callers multiplying by ``exp(z**2 / 4)`` never overflow prematurely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma
from scipy.special import rgamma

from .errors import DomainError, NonConvergence, PoleError
from .quadrature import DEFAULT_RULE, PanelRule, integrate_power

SQRT_PI = math.sqrt(math.pi)
SQRT_2PI = math.sqrt(2.0 * math.pi)
# The recessive Taylor integration starts at asym_switch_z + |alpha| with the
# exponential factor folded into the mantissa; this bound keeps it in range.
MAX_ORDER = 30.0


@dataclass(frozen=True)
class SpecFunConfig:
    series_tol: float = 1e-14
    max_terms: int = 2000
    asym_switch_z: float = 8.0
    # cap on asymptotic correction terms; sums stop early at optimal truncation
    asym_terms: int = 40
    # Upper end of the positive-z series region; the Taylor-ODE branch covers
    # [series_switch_z, asym_switch_z).
    series_switch_z: float = 2.5
    neg_asym_switch_z: float = 20.0
    ode_step: float = 0.25
    taylor_terms: int = 30

    def __post_init__(self):
        if not self.series_tol > 0:
            raise ValueError("series_tol must be positive")
        if self.max_terms < 10:
            raise ValueError("max_terms must be at least 10")
        if not self.asym_switch_z > 0:
            raise ValueError("asym_switch_z must be positive")
        if not 0 < self.series_switch_z <= self.asym_switch_z:
            raise ValueError("series_switch_z must lie in (0, asym_switch_z]")
        if not self.neg_asym_switch_z > 0:
            raise ValueError("neg_asym_switch_z must be positive")


DEFAULT_CONFIG = SpecFunConfig()


@dataclass(frozen=True)
class PcfOrder:
    """Order of a parabolic cylinder function in both conventions.

    ``U(a, z) = D_alpha(z)`` with ``a = -alpha - 1/2``.
    """

    a: float
    alpha: float

    def __post_init__(self):
        # a + alpha = -1/2 holds to rounding; from_a/from_alpha build it that way
        if abs(self.a + self.alpha + 0.5) > 4.0 * np.finfo(float).eps * max(1.0, abs(self.a)):
            raise ValueError(f"inconsistent order: a={self.a}, alpha={self.alpha}")

    @classmethod
    def from_a(cls, a: float) -> "PcfOrder":
        return cls(float(a), -float(a) - 0.5)

    @classmethod
    def from_alpha(cls, alpha: float) -> "PcfOrder":
        # a is derived from alpha, then alpha re-derived so the sum is exact
        a = -float(alpha) - 0.5
        return cls(a, -a - 0.5)


def _is_nonpositive_int(v: float) -> bool:
    return v <= 0 and v == math.floor(v)


def _as_output(values: np.ndarray, like):
    if np.ndim(like) == 0:
        return float(np.asarray(values).reshape(-1)[0])
    return values


# --------------------------------------------------------------------------
# Kummer 1F1
# --------------------------------------------------------------------------


def _kummer_series(a: float, b: float, y: np.ndarray, cfg: SpecFunConfig) -> np.ndarray:
    """Taylor series of M(a, b, y), vectorised over ``y``.

    Each element stops on its own, so a value does not depend on which
    other arguments share the call.
    """
    y = np.asarray(y, dtype=float)
    term = np.ones_like(y)
    total = np.ones_like(y)
    active = np.ones(y.shape, dtype=bool)
    for n in range(cfg.max_terms):
        if a + n == 0:
            return total
        term = term * ((a + n) / ((b + n) * (n + 1))) * y
        total = np.where(active, total + term, total)
        small = np.abs(term) <= cfg.series_tol * np.abs(total)
        # later terms only shrink once |(a+n)y| < |(b+n)(n+1)|
        shrinking = np.abs(a + n + 1) * np.abs(y) < np.abs(b + n + 1) * (n + 2)
        active &= ~(small & shrinking)
        if not np.any(active):
            return total
    raise NonConvergence(
        f"1F1({a}, {b}, z) did not converge in {cfg.max_terms} terms "
        f"(max |z| = {float(np.max(np.abs(y))) if y.size else 0.0})"
    )


def kummer_1f1(a: float, b: float, z: float, cfg: SpecFunConfig = DEFAULT_CONFIG) -> float:
    """Kummer's confluent hypergeometric function M(a, b, z) for real arguments.

    Negative ``z`` with ``a > 0`` goes through Kummer's transformation
    ``M(a, b, z) = exp(z) M(b - a, b, -z)`` so the summed series has no
    alternating cancellation.
    """
    a, b, z = float(a), float(b), float(z)
    if _is_nonpositive_int(b):
        terminates = _is_nonpositive_int(a) and a >= b
        if not terminates:
            raise PoleError(f"1F1 has a pole at b={b} for a={a}")
    elif z < 0 and a > 0:
        return math.exp(z) * float(_kummer_series(b - a, b, np.array(-z), cfg))
    return float(_kummer_series(a, b, np.array(z), cfg))


# --------------------------------------------------------------------------
# Parabolic cylinder functions
# --------------------------------------------------------------------------


def _truncated_sum(ratio, z: np.ndarray, n_terms: int, tol: float):
    """Sum 1 + t_1 + t_2 + ... with t_{s+1} = t_s * ratio(s) / (2 z^2).

    Each element stops at optimal truncation: once its terms fall below
    ``tol`` relative to the sum, or start to grow. Also returns the
    termwise z-derivative of the sum.
    """
    u = 1.0 / (2.0 * z * z)
    term = np.ones_like(z)
    total = np.ones_like(z)
    dtotal = np.zeros_like(z)
    active = np.ones(z.shape, dtype=bool)
    for s in range(n_terms):
        nxt = term * ratio(s) * u
        active &= np.abs(nxt) <= np.abs(term)
        if not np.any(active):
            break
        total = np.where(active, total + nxt, total)
        dtotal = np.where(active, dtotal - 2.0 * (s + 1) * nxt / z, dtotal)
        term = nxt
        active &= np.abs(nxt) > tol * np.abs(total)
    return total, dtotal


def _asym_sums(alpha: float, z: np.ndarray, cfg: SpecFunConfig) -> tuple[np.ndarray, np.ndarray]:
    """S(z) = sum_s (-1)^s (-alpha)_{2s} / (s! (2 z^2)^s) and dS/dz."""
    return _truncated_sum(
        lambda s: -(2 * s - alpha) * (2 * s + 1 - alpha) / (s + 1), z, cfg.asym_terms, cfg.series_tol
    )


def _recessive_sum(alpha: float, z: np.ndarray, cfg: SpecFunConfig) -> np.ndarray:
    """sum_s (alpha+1)_{2s} / (s! (2 z^2)^s), the dominant-side expansion."""
    total, _ = _truncated_sum(
        lambda s: (alpha + 1 + 2 * s) * (alpha + 2 + 2 * s) / (s + 1), z, cfg.asym_terms, cfg.series_tol
    )
    return total


def _taylor_weber(
    a: float, p: np.ndarray, y: np.ndarray, dy: np.ndarray, h: np.ndarray, n_terms: int
) -> tuple[np.ndarray, np.ndarray]:
    """One Taylor step of y'' = (a + z^2/4) y from z = p to z = p + h."""
    q0 = a + 0.25 * p * p
    half_p = 0.5 * p
    zero = np.zeros_like(y)
    c = [y, dy]
    for k in range(n_terms - 2):
        c_km1 = c[k - 1] if k >= 1 else zero
        c_km2 = c[k - 2] if k >= 2 else zero
        c.append((q0 * c[k] + half_p * c_km1 + 0.25 * c_km2) / ((k + 2) * (k + 1)))
    y_new = c[-1]
    dy_new = (len(c) - 1) * c[-1]
    for k in range(len(c) - 2, -1, -1):
        y_new = y_new * h + c[k]
        if k >= 1:
            dy_new = dy_new * h + k * c[k]
    return y_new, dy_new


def _pos_switch(alpha: float, cfg: SpecFunConfig) -> float:
    # For negative orders the coefficients (-alpha)_{2s} shrink slowly, so the
    # asymptotic expansion only reaches full precision further out.
    # Large positive orders need z well past alpha / sqrt(2) before the
    # expansion starts to converge at all.
    return cfg.asym_switch_z + abs(alpha)


def _series_switch(alpha: float, cfg: SpecFunConfig) -> float:
    # Below alpha = -1 the two series terms cancel by roughly exp(z^2/2), so
    # the recessive integration is carried further towards the origin.
    if alpha >= -1.0:
        return cfg.series_switch_z
    return cfg.series_switch_z / math.sqrt(-alpha)


def _pcf_parts(alpha: float, z, cfg: SpecFunConfig) -> tuple[np.ndarray, np.ndarray]:
    """D_alpha(z) as ``mantissa * exp(exponent)``, vectorised over ``z``."""
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise DomainError(f"order must be finite, got {alpha}")
    if abs(alpha) > MAX_ORDER:
        raise DomainError(f"|order| must not exceed {MAX_ORDER}, got {alpha}")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    mant = np.empty_like(z)
    expo = np.empty_like(z)

    z_switch = _pos_switch(alpha, cfg)
    pos_asym = z >= z_switch
    neg_asym = z <= -max(cfg.neg_asym_switch_z, cfg.asym_switch_z + max(alpha, 0.0))
    ode = (z >= _series_switch(alpha, cfg)) & ~pos_asym
    series = ~(pos_asym | neg_asym | ode)

    if np.any(series):
        zs = z[series]
        y = 0.5 * zs * zs
        c_even = float(rgamma(0.5 * (1.0 - alpha)))
        c_odd = float(rgamma(-0.5 * alpha))
        acc = np.zeros_like(zs)
        if c_even != 0.0:
            acc = acc + c_even * _kummer_series(-0.5 * alpha, 0.5, y, cfg)
        if c_odd != 0.0:
            acc = acc - math.sqrt(2.0) * zs * c_odd * _kummer_series(0.5 - 0.5 * alpha, 1.5, y, cfg)
        mant[series] = SQRT_PI * 2.0 ** (0.5 * alpha) * acc
        expo[series] = -0.25 * zs * zs

    if np.any(pos_asym):
        zp = z[pos_asym]
        s, _ = _asym_sums(alpha, zp, cfg)
        mant[pos_asym] = zp**alpha * s
        expo[pos_asym] = -0.25 * zp * zp

    if np.any(ode):
        target = z[ode]
        z0 = z_switch
        s0, ds0 = _asym_sums(alpha, np.array([z0]), cfg)
        g0 = math.exp(-0.25 * z0 * z0)
        y0 = z0**alpha * s0[0] * g0
        dy0 = g0 * (z0**alpha * (-0.5 * z0 * s0[0] + ds0[0]) + alpha * z0 ** (alpha - 1.0) * s0[0])
        pos = np.full_like(target, z0)
        yv = np.full_like(target, y0)
        dyv = np.full_like(target, dy0)
        a = -alpha - 0.5
        while True:
            h = np.maximum(target - pos, -cfg.ode_step)
            if not np.any(h < 0):
                break
            yv, dyv = _taylor_weber(a, pos, yv, dyv, h, cfg.taylor_terms)
            pos = pos + h
            # land exactly on the target to avoid a stray tiny step
            pos = np.where(np.abs(pos - target) < 1e-14, target, pos)
        mant[ode] = yv
        expo[ode] = 0.0

    if np.any(neg_asym):
        zz = -z[neg_asym]
        s, _ = _asym_sums(alpha, zz, cfg)
        r = float(rgamma(-alpha))
        if r == 0.0:
            n = int(round(alpha))
            mant[neg_asym] = (-1.0) ** n * zz**alpha * s
            expo[neg_asym] = -0.25 * zz * zz
        else:
            v = _recessive_sum(alpha, zz, cfg)
            recessive = math.cos(math.pi * alpha) * zz**alpha * s * np.exp(-0.5 * zz * zz)
            mant[neg_asym] = SQRT_2PI * r * zz ** (-alpha - 1.0) * v + recessive
            expo[neg_asym] = 0.25 * zz * zz

    return mant, expo


def pcf_D_log(alpha: float, z, cfg: SpecFunConfig = DEFAULT_CONFIG) -> tuple[np.ndarray, np.ndarray]:
    """``(sign, log|D_alpha(z)|)`` as arrays; safe far beyond float range."""
    mant, expo = _pcf_parts(alpha, z, cfg)
    with np.errstate(divide="ignore"):
        return np.sign(mant), np.log(np.abs(mant)) + expo


def pcf_U(a: float, z, cfg: SpecFunConfig = DEFAULT_CONFIG):
    """Parabolic cylinder function U(a, z) for real ``a`` and ``z``."""
    order = PcfOrder.from_a(a)
    mant, expo = _pcf_parts(order.alpha, z, cfg)
    with np.errstate(over="raise"):
        try:
            out = mant * np.exp(expo)
        except FloatingPointError as exc:
            raise OverflowError(f"U({a}, z) exceeds the float range") from exc
    return _as_output(out, z)


def pcf_D(alpha: float, z, cfg: SpecFunConfig = DEFAULT_CONFIG):
    """Whittaker's D_alpha(z) = U(-alpha - 1/2, z)."""
    return pcf_U(PcfOrder.from_alpha(alpha).a, z, cfg)


def pcf_U_integral(gamma: float, z: float, rule: PanelRule = DEFAULT_RULE) -> float:
    """U(gamma, z) by quadrature of its real-line integral representation.

    Valid for ``gamma > -1/2``. Kept independent of the series/asymptotic
    evaluation in :func:`pcf_U` so either can check the other.
    """
    gamma, z = float(gamma), float(z)
    if gamma <= -0.5:
        raise DomainError(f"integral representation needs gamma > -1/2, got {gamma}")
    # exp(-z^2/4) * exp(-tau^2/2 - z tau) = exp(z^2/4 - (tau + z)^2/2)
    upper = max(0.0, -z) + 12.0
    scale = 1.0 / max(1.0, z)
    val = integrate_power(
        gamma - 0.5,
        lambda tau: np.exp(0.25 * z * z - 0.5 * (tau + z) ** 2),
        upper,
        scale,
        rule,
    )
    return val / float(_gamma(gamma + 0.5))


# --------------------------------------------------------------------------
# Hermite polynomials and digamma
# --------------------------------------------------------------------------


def hermite(n: int, x, t: float):
    """Scaled probabilists' Hermite polynomial ``t**(n/2) He_n(x / sqrt(t))``.

    Evaluated by the three-term recurrence ``H_{k+1} = x H_k - k t H_{k-1}``.
    """
    if n < 0 or int(n) != n:
        raise DomainError(f"degree must be a nonnegative integer, got {n}")
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    xa = np.asarray(x, dtype=float)
    prev = np.ones_like(xa)
    if n == 0:
        return _as_output(prev, x)
    cur = xa.copy()
    for k in range(1, int(n)):
        prev, cur = cur, xa * cur - k * t * prev
    return _as_output(cur, x)


# Bernoulli-number coefficients B_{2k} / (2k) for the digamma tail
_DIGAMMA_TAIL = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
)


def digamma(z: float) -> float:
    """psi(z) = Gamma'(z) / Gamma(z) for real ``z`` off the non-positive integers."""
    z = float(z)
    if _is_nonpositive_int(z):
        raise PoleError(f"digamma has a pole at {z}")
    if z < 0:
        # reflection: psi(z) = psi(1 - z) - pi cot(pi z)
        return digamma(1.0 - z) - math.pi / math.tan(math.pi * z)
    shift = 0.0
    while z < 12.0:
        shift -= 1.0 / z
        z += 1.0
    inv2 = 1.0 / (z * z)
    tail = 0.0
    p = inv2
    for c in _DIGAMMA_TAIL:
        tail += c * p
        p *= inv2
    return shift + math.log(z) - 0.5 / z - tail
