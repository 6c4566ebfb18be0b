"""Wiener paths and checks of the stochastic properties of H_alpha(W_t, t).

Paths are generated in fixed-size blocks, each with its own counter-based
Philox stream keyed by ``(seed, stream, block)``. The output is therefore
the same whatever the number of worker threads, and the first ``k`` paths
of a larger ensemble equal a ``k``-path ensemble with the same seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gamma as _gamma
from scipy.stats import kstwobign

from .errors import DivergentIntegral, DomainError
from .pncf import PncfSpec, eval_H, integer_order, log_H
from .quadrature import QuadratureGrid, _legendre
from .specfun import hermite

BLOCK_PATHS = 4096
EXACT_GAUSSIAN = "exact_gaussian_increments"


# --------------------------------------------------------------------------
# Containers
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WienerEnsemble:
    times: np.ndarray
    paths: np.ndarray = field(repr=False)
    seed: int
    scheme: str = EXACT_GAUSSIAN
    stream: int = 0

    def __post_init__(self):
        if self.times.ndim != 1 or self.times[0] != 0 or np.any(np.diff(self.times) <= 0):
            raise DomainError("times must increase strictly from 0")
        if self.paths.shape[1] != self.times.size:
            raise ValueError("paths must have one column per time")
        if np.any(self.paths[:, 0] != 0):
            raise ValueError("every path must start at 0")

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n: int
    target: float | None = None

    def __post_init__(self):
        if self.std_error < 0 or self.n < 2:
            raise ValueError("need std_error >= 0 and n >= 2")

    @classmethod
    def from_samples(cls, samples: np.ndarray, target: float | None = None) -> "McEstimate":
        x = np.asarray(samples, dtype=float).ravel()
        return cls(float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size)), int(x.size), target)

    @property
    def z_score(self) -> float:
        if self.target is None:
            raise ValueError("no target set")
        if self.std_error == 0:
            return 0.0 if self.mean == self.target else math.inf
        return (self.mean - self.target) / self.std_error

    def within(self, k: float) -> bool:
        return abs(self.z_score) <= k


@dataclass(frozen=True)
class BivariateNormalParams:
    """``(W_s, W_t)`` with ``s < t``; correlation ``sqrt(s / t)``."""

    s: float
    t: float
    rho: float = field(init=False)

    def __post_init__(self):
        if not 0 < self.s < self.t:
            raise DomainError(f"need 0 < s < t, got s={self.s}, t={self.t}")
        object.__setattr__(self, "rho", math.sqrt(self.s / self.t))


# --------------------------------------------------------------------------
# Simulation
# --------------------------------------------------------------------------


def _block(seed: int, stream: int, block: int, rows: int, dt: np.ndarray) -> np.ndarray:
    key = seed + (((stream << 32) | block) << 64)
    gen = np.random.Generator(np.random.Philox(key=key))
    steps = gen.standard_normal((rows, dt.size)) * np.sqrt(dt)
    out = np.zeros((rows, dt.size + 1))
    np.cumsum(steps, axis=1, out=out[:, 1:])
    return out


def simulate_wiener(
    n_paths: int, times: Sequence[float], seed: int, stream: int = 0, workers: int = 1
) -> WienerEnsemble:
    """Exact Gaussian-increment Wiener paths on ``times``."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2 or times[0] != 0 or np.any(np.diff(times) <= 0):
        raise DomainError("times must increase strictly from 0")
    if n_paths < 1:
        raise DomainError("n_paths must be positive")
    if not 0 <= seed < 2**64 or not 0 <= stream < 2**32:
        raise DomainError("seed must fit in 64 bits and stream in 32")
    dt = np.diff(times)
    n_blocks = -(-n_paths // BLOCK_PATHS)
    jobs = [(seed, stream, b, min(BLOCK_PATHS, n_paths - b * BLOCK_PATHS), dt) for b in range(n_blocks)]
    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda j: _block(*j), jobs))
    else:
        blocks = [_block(*j) for j in jobs]
    return WienerEnsemble(times, np.vstack(blocks), int(seed), EXACT_GAUSSIAN, int(stream))


def _H_at_zero_time(alpha: float, x: np.ndarray) -> np.ndarray:
    # small-t limit: H_alpha(x, 0) = x^alpha, with 0^alpha = 0 for alpha > 0
    if alpha == 0:
        return np.ones_like(x)
    if np.all(x == 0):
        if alpha < 0:
            raise DomainError("H_alpha(0, 0) is unbounded for alpha < 0")
        return np.zeros_like(x)
    if integer_order(alpha) is None and np.any(x < 0):
        raise DomainError("x^alpha at t = 0 is not real for x < 0 and non-integer alpha")
    return np.power(x, alpha)


def eval_process(ens: WienerEnsemble, alpha: float) -> np.ndarray:
    """``H_alpha(W_{t_j}, t_j)`` for every path and time."""
    out = np.empty_like(ens.paths)
    for j, t in enumerate(ens.times):
        col = ens.paths[:, j]
        out[:, j] = _H_at_zero_time(alpha, col) if t == 0 else eval_H(PncfSpec(alpha, float(t)), col)
    return out


def fractional_ito(alpha: float, ens: WienerEnsemble) -> np.ndarray:
    """``H_alpha(W_t, t) / Gamma(alpha + 1)``; the n-fold iterated integral at alpha = n."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    return eval_process(ens, alpha) / float(_gamma(alpha + 1.0))


# --------------------------------------------------------------------------
# Martingale property
# --------------------------------------------------------------------------


class CondCheck(NamedTuple):
    lhs: float
    rhs: float


def _log_sum(sign: np.ndarray, logv: np.ndarray, w: np.ndarray) -> float:
    m = np.max(logv[np.isfinite(logv)])
    return float(np.dot(w, sign * np.exp(logv - m))) * math.exp(m)


def conditional_expectation_check(
    alpha: float, w: float, s: float, t: float, panels_per_sd: float = 2.0, n_per: int = 32
) -> CondCheck:
    """``E[H_alpha(W_t, t) | W_s = w]`` by quadrature against ``H_alpha(w, s)``.

    Integer orders use Gauss-Hermite nodes, exact for the polynomial.
    Otherwise the integrand ``H_alpha(y, t) N(y; w, t - s)`` is summed in the
    log domain on Legendre panels: besides the bump at ``w`` it carries a
    second one at ``y = w t / s`` (sd ``sqrt(t (t-s)/s)``) where the growth of
    H for ``y << 0`` meets the Gaussian.
    """
    if not 0 < s < t:
        raise DomainError(f"need 0 < s < t, got s={s}, t={t}")
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    var = t - s
    rhs = float(eval_H(PncfSpec(alpha, s), w))
    n = integer_order(alpha)
    if n is not None:
        grid = QuadratureGrid.full_line(var, n_nodes=max(20, n + 2))
        y = w + grid.nodes
        lhs = float(np.dot(grid.weights, hermite(n, y, t))) / math.sqrt(2 * math.pi * var)
        return CondCheck(lhs, rhs)
    sd1 = math.sqrt(var)
    ystar, sd2 = w * t / s, math.sqrt(t * var / s)
    lo = min(w - 14 * sd1, ystar - 14 * sd2)
    hi = max(w + 14 * sd1, ystar + 14 * sd2)
    width = min(sd1, sd2) / panels_per_sd
    n_panels = int(math.ceil((hi - lo) / width))
    xg, wg = _legendre(n_per)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    y = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    wts = (half[:, None] * wg[None, :]).ravel()
    sign, logh = log_H(PncfSpec(alpha, t), y)
    logv = logh - (y - w) ** 2 / (2 * var) - 0.5 * math.log(2 * math.pi * var)
    return CondCheck(_log_sum(sign, logv, wts), rhs)


def mc_martingale_test(alpha: float, ens: WienerEnsemble, s_idx: int, t_idx: int) -> McEstimate:
    """MC estimate of ``E[H_alpha(W_t, t) - H_alpha(W_s, s)]``; target 0."""
    if not 0 <= s_idx < t_idx < ens.times.size:
        raise DomainError("need 0 <= s_idx < t_idx < number of times")
    hs = eval_process_column(ens, alpha, s_idx)
    ht = eval_process_column(ens, alpha, t_idx)
    return McEstimate.from_samples(ht - hs, target=0.0)


def mc_mean_test(alpha: float, ens: WienerEnsemble, t_idx: int) -> McEstimate:
    """MC estimate of ``E[H_alpha(W_t, t)]``; target ``H_alpha(0, 0)``."""
    target = 1.0 if alpha == 0 else 0.0
    return McEstimate.from_samples(eval_process_column(ens, alpha, t_idx), target=target)


def eval_process_column(ens: WienerEnsemble, alpha: float, j: int) -> np.ndarray:
    t = float(ens.times[j])
    col = ens.paths[:, j]
    return _H_at_zero_time(alpha, col) if t == 0 else np.asarray(eval_H(PncfSpec(alpha, t), col))


# --------------------------------------------------------------------------
# Covariance and correlation
# --------------------------------------------------------------------------


def _gauss_moment(k: int, var: float) -> float:
    if k % 2:
        return 0.0
    return math.prod(range(k - 1, 0, -2)) * var ** (k // 2)


def _hermite_coeffs(n: int, t: float) -> list[float]:
    # H_n(x, t) = sum_j (-1)^j n! / (2^j (n-2j)! j!) t^j x^(n-2j), listed by power of x
    c = [0.0] * (n + 1)
    for j in range(n // 2 + 1):
        c[n - 2 * j] = (-1) ** j * math.factorial(n) / (2**j * math.factorial(n - 2 * j) * math.factorial(j)) * t**j
    return c


def bivariate_moment(i: int, j: int, params: BivariateNormalParams) -> float:
    """``E[W_t^i W_s^j]`` from ``W_t = W_s + B`` with ``B ~ N(0, t - s)`` independent."""
    s, t = params.s, params.t
    return sum(
        math.comb(i, k) * _gauss_moment(k + j, s) * _gauss_moment(i - k, t - s) for k in range(i + 1)
    )


def covariance_moment_oracle(n: int, params: BivariateNormalParams) -> float:
    """``Cov(H_n(W_t, t), H_n(W_s, s))`` by expanding both polynomials into moments."""
    ct, cs = _hermite_coeffs(n, params.t), _hermite_coeffs(n, params.s)
    mixed = sum(a * b * bivariate_moment(i, j, params) for i, a in enumerate(ct) for j, b in enumerate(cs) if a and b)
    mean_t = sum(a * _gauss_moment(i, params.t) for i, a in enumerate(ct))
    mean_s = sum(b * _gauss_moment(j, params.s) for j, b in enumerate(cs))
    return mixed - mean_t * mean_s


class CovarianceReport(NamedTuple):
    alpha: float
    s: float
    t: float
    covariance: float
    var_t: float
    var_s: float
    correlation: float
    printed_value: float  # s^alpha
    measured_constant: float  # covariance / s^alpha


def _box_moments(alpha: float, params: BivariateNormalParams, half_width: float, n_per: int = 24):
    """E[H_t H_s], E[H_t^2], E[H_s^2], E[H_t], E[H_s] over ``|z| <= half_width``.

    In standardised coordinates ``W_s = sqrt(s) u``,
    ``W_t = sqrt(t) (rho u + sqrt(1 - rho^2) v)`` with ``u, v`` iid N(0, 1).
    """
    s, t, rho = params.s, params.t, params.rho
    xg, wg = _legendre(n_per)
    n_panels = int(math.ceil(2 * half_width))
    edges = np.linspace(-half_width, half_width, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    z = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    wz = (half[:, None] * wg[None, :]).ravel() * np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
    u, v = np.meshgrid(z, z, indexing="ij")
    w2 = np.outer(wz, wz)
    xs = math.sqrt(s) * u
    xt = math.sqrt(t) * (rho * u + math.sqrt(1 - rho * rho) * v)
    ss, ls = log_H(PncfSpec(alpha, s), xs.ravel())
    st, lt = log_H(PncfSpec(alpha, t), xt.ravel())
    hs = (ss * np.exp(ls)).reshape(u.shape)
    ht = (st * np.exp(lt)).reshape(u.shape)
    return np.array([np.sum(w2 * ht * hs), np.sum(w2 * ht * ht), np.sum(w2 * hs * hs), np.sum(w2 * ht), np.sum(w2 * hs)])


def _check_second_moment(alpha: float, t: float, boxes: Sequence[float], rtol: float) -> None:
    # the one-dimensional E[H_alpha(W_t, t)^2] is cheap and diverges exactly
    # when the bivariate moments do, so it is checked first
    xg, wg = _legendre(32)
    vals = []
    for L in boxes:
        edges = np.linspace(-L, L, int(math.ceil(4 * L)) + 1)
        half = 0.5 * np.diff(edges)
        z = ((0.5 * (edges[1:] + edges[:-1]))[:, None] + half[:, None] * xg[None, :]).ravel()
        w = (half[:, None] * wg[None, :]).ravel()
        sign, logh = log_H(PncfSpec(alpha, t), math.sqrt(t) * z)
        vals.append(float(np.dot(w, np.exp(2 * logh - 0.5 * z * z))) / math.sqrt(2 * math.pi))
    if not np.isfinite(vals[-1]) or abs(vals[-1] - vals[-2]) > rtol * max(abs(vals[-1]), 1.0):
        raise DivergentIntegral(
            f"E[H_{alpha}(W_t, t)^2] keeps growing with the box: "
            + ", ".join(f"L={L}: {v:.6g}" for L, v in zip(boxes, vals))
        )


def covariance_report(
    alpha: float, params: BivariateNormalParams, boxes: Sequence[float] = (10.0, 14.0, 18.0), rtol: float = 1e-9
) -> CovarianceReport:
    """Covariance, variances and correlation by a double quadrature.

    The quadrature box is widened through ``boxes``; if the moments do not
    settle to ``rtol`` a DivergentIntegral is raised rather than returning a
    truncation-dependent number.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    _check_second_moment(alpha, params.t, boxes, rtol)
    with np.errstate(over="ignore", invalid="ignore"):
        history = [_box_moments(alpha, params, L) for L in boxes]
    last, prev = history[-1], history[-2]
    scale = np.maximum(np.abs(last), 1.0)
    if not np.all(np.isfinite(last)) or np.any(np.abs(last - prev) > rtol * scale):
        raise DivergentIntegral(
            f"moments of H_{alpha} keep changing as the box grows: "
            + ", ".join(f"L={L}: E[HtHs]={h[0]:.6g}, E[Ht^2]={h[1]:.6g}" for L, h in zip(boxes, history))
        )
    e_ts, e_tt, e_ss, m_t, m_s = last
    cov = e_ts - m_t * m_s
    var_t, var_s = e_tt - m_t * m_t, e_ss - m_s * m_s
    corr = cov / math.sqrt(var_t * var_s) if var_t > 0 and var_s > 0 else math.nan
    printed = params.s**alpha
    return CovarianceReport(alpha, params.s, params.t, cov, var_t, var_s, corr, printed, cov / printed)


def covariance_quadrature(alpha: float, params: BivariateNormalParams) -> float:
    return covariance_report(alpha, params).covariance


def correlation_test(alpha: float, params: BivariateNormalParams) -> float:
    return covariance_report(alpha, params).correlation


# --------------------------------------------------------------------------
# Ito formula
# --------------------------------------------------------------------------


def _euler_errors(alpha: float, times: np.ndarray, paths: np.ndarray) -> np.ndarray:
    integrand = np.empty((paths.shape[0], times.size - 1))
    for j in range(times.size - 1):
        integrand[:, j] = _H_at_zero_time(alpha - 1, paths[:, j]) if times[j] == 0 else eval_H(
            PncfSpec(alpha - 1, float(times[j])), paths[:, j]
        )
    euler = alpha * np.sum(integrand * np.diff(paths, axis=1), axis=1)
    exact = np.asarray(eval_H(PncfSpec(alpha, float(times[-1])), paths[:, -1]))
    return np.abs(euler - exact)


def ito_euler_check(alpha: float, ens: WienerEnsemble, max_rel_step: float = 1e-3) -> McEstimate:
    """Mean absolute gap between the Euler sum of ``alpha H_{alpha-1} dW`` and
    ``H_alpha(W_T, T) - H_alpha(0, 0)``."""
    if not alpha > 1:
        raise DomainError(f"alpha must exceed 1, got {alpha}")
    dt = np.diff(ens.times)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        raise DomainError("the time grid must be uniform")
    if dt[0] > max_rel_step * ens.times[-1]:
        raise DomainError(f"time step {dt[0]} exceeds {max_rel_step} of the horizon")
    return McEstimate.from_samples(_euler_errors(alpha, ens.times, ens.paths))


class StrongOrder(NamedTuple):
    alpha: float
    coarse: McEstimate
    fine: McEstimate
    ratio: float
    order: float


def ito_strong_order(
    alpha: float, n_paths: int, horizon: float, n_fine: int, seed: int, refinement: int = 4, workers: int = 1
) -> StrongOrder:
    """Strong order of the Euler sum from one fine ensemble and its subsampling."""
    if n_fine % refinement:
        raise DomainError("n_fine must be a multiple of the refinement factor")
    times = np.linspace(0.0, horizon, n_fine + 1)
    ens = simulate_wiener(n_paths, times, seed, workers=workers)
    coarse_ens = WienerEnsemble(times[::refinement], ens.paths[:, ::refinement], ens.seed, ens.scheme, ens.stream)
    fine = ito_euler_check(alpha, ens)
    coarse = ito_euler_check(alpha, coarse_ens, max_rel_step=refinement * 1e-3)
    ratio = coarse.mean / fine.mean
    return StrongOrder(alpha, coarse, fine, ratio, math.log(ratio) / math.log(refinement))


# --------------------------------------------------------------------------
# Self-similarity
# --------------------------------------------------------------------------


class KsResult(NamedTuple):
    statistic: float
    p_value: float


def ks_2samp(a: np.ndarray, b: np.ndarray) -> KsResult:
    """Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n, m = a.size, b.size
    if n == 0 or m == 0:
        raise DomainError("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / n
    cdf_b = np.searchsorted(b, pooled, side="right") / m
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    en = math.sqrt(n * m / (n + m))
    return KsResult(d, float(kstwobign.sf(d * en)))


def self_similarity_samples(alpha: float, c: float, t: float, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """``H_alpha(W_ct, ct)`` and ``c^{alpha/2} H_alpha(W_t, t)`` from independent streams."""
    if not c > 0 or not t > 0:
        raise DomainError("c and t must be positive")
    big = simulate_wiener(n, [0.0, c * t], seed, stream=0)
    small = simulate_wiener(n, [0.0, t], seed, stream=1)
    lhs = np.asarray(eval_H(PncfSpec(alpha, c * t), big.paths[:, 1]))
    rhs = c ** (alpha / 2) * np.asarray(eval_H(PncfSpec(alpha, t), small.paths[:, 1]))
    return lhs, rhs


def self_similarity_ks(alpha: float, c: float, t: float, n: int, seed: int) -> KsResult:
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if n < 1000:
        raise DomainError("use at least 1000 samples per side")
    return ks_2samp(*self_similarity_samples(alpha, c, t, n, seed))
